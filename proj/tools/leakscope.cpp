// SPDX-License-Identifier: Apache-2.0
#include "leakscope/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return leakscope::run_cli(argc, argv, std::cout, std::cerr); }
