// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "effsearch/cli.hpp"

int main(int argc, char** argv) { return effsearch::cli::run(argc, argv, std::cout, std::cerr); }
