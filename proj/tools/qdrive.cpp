#include "qdrive/cli.hpp"

int main(int argc, char** argv) { return qdrive::cli::main_entry(argc, argv); }
