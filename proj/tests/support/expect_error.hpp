#pragma once

#include <gtest/gtest.h>

#include "hifreq/core/error.hpp"

// Asserts that `stmt` throws hifreq::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                     \
  do {                                                                              \
    bool thrown_ = false;                                                           \
    try {                                                                           \
      stmt;                                                                         \
    } catch (const ::hifreq::Error& e_) {                                           \
      thrown_ = true;                                                               \
      EXPECT_EQ(e_.code(), (expected_code)) << e_.what();                           \
    }                                                                               \
    EXPECT_TRUE(thrown_) << "expected " << ::hifreq::to_string(expected_code);      \
  } while (0)
