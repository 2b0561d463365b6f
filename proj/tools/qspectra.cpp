#include "qspectra/cli.hpp"

int main(int argc, char** argv) { return qspectra::cli::main(argc, argv); }
