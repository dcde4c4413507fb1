#include <iostream>

#include "ruleseeker/cli.hpp"

int main(int argc, char** argv) { return ruleseeker::runCli(argc, argv, std::cout, std::cerr); }
