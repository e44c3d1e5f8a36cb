#include <iostream>

#include "agentinv/cli.hpp"

int main(int argc, char** argv) { return agentinv::run_cli(argc, argv, std::cout, std::cerr); }
