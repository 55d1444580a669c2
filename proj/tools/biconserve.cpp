#include "cli/commands.hpp"
int main(int argc, char** argv) { return bicons::cli::main(argc, argv); }
