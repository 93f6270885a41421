#include "cli/commands.hpp"

int main(int argc, char** argv) { return ganeye::cli::run(argc, argv); }
