#include "contraforge/cli.hpp"

int main(int argc, char** argv) { return contraforge::cli::run(argc, argv); }
