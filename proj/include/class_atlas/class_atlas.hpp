// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "class_atlas/error.hpp"
#include "class_atlas/groups.hpp"
#include "class_atlas/ingest.hpp"
#include "class_atlas/matrix.hpp"
#include "class_atlas/parallel.hpp"
#include "class_atlas/random.hpp"
#include "class_atlas/render.hpp"
#include "class_atlas/seriation.hpp"
#include "class_atlas/similarity.hpp"
#include "class_atlas/synth.hpp"
