#include "cwi/cli.hpp"

int main(int argc, char** argv) { return cwi::cli::run(argc, argv); }
