#pragma once

// Single include point for cpp-httplib so every translation unit sees the
// same feature macros (mixing them breaks the one-definition rule).
#ifdef BUGCLASS_HTTPS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
