// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "bytehue/cli.hpp"

int main(int argc, char** argv) { return bytehue::cli_main(argc, argv); }
