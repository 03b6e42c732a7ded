// Copyright Contributors to the gsr Project
// SPDX-License-Identifier: Apache-2.0

#include "gsr/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return gsr::run_cli(argc, argv, std::cout, std::cerr); }
