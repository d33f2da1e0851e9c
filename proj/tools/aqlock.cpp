#include <iostream>

#include "aqlock/pipeline.hpp"

int main(int argc, char** argv) { return aqlock::pipeline::run_cli(argc, argv, std::cout, std::cerr); }
