#include <iostream>

#include "calib/cli.hpp"

int main(int argc, char** argv) { return calib::run_cli(argc, argv, std::cout, std::cerr); }
