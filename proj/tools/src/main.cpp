// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "fusecost_cli/cli.hpp"

int main(int argc, char** argv) { return fusecost::cli::run(argc, argv, std::cout, std::cerr); }
