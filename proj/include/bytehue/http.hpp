// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single point of inclusion for cpp-httplib so every translation unit sees
// the same configuration.
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

// <resolv.h> defines `_res` as a macro, which collides with identifiers in
// Eigen's product kernels.
#ifdef _res
#undef _res
#endif
