#include "commands.hpp"

int main(int argc, char** argv) { return wavechaos::cli::run(argc, argv); }
