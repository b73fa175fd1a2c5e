// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0

#include "class_atlas/cli/app.hpp"

int main(int argc, char** argv) { return class_atlas::cli::run(argc, argv); }
