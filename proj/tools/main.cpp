#include "cli.hpp"

int main(int argc, char** argv) { return contraction::cli::run(argc, argv); }
