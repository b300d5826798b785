#include <iostream>

#include "neurolgp/cli.hpp"

int main(int argc, char** argv) { return nlgp::cli::main(argc, argv, std::cout, std::cerr); }
