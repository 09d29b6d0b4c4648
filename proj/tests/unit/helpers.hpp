#pragma once

#include "distress/errors.hpp"

#include <filesystem>
#include <string>

#include <doctest.h>

#define CHECK_ERRC(expr, errc)                                      \
    do {                                                            \
        bool distress_thrown_ = false;                              \
        try {                                                       \
            static_cast<void>(expr);                                \
        } catch (const distress::Error& e) {                        \
            distress_thrown_ = true;                                \
            CHECK_MESSAGE(e.code() == (errc), distress::to_string(e.code())); \
        }                                                           \
        CHECK_MESSAGE(distress_thrown_, "expected " #errc);         \
    } while (false)

namespace testing {

inline std::filesystem::path data_dir() { return DISTRESS_DATA_DIR; }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / "distress-unit" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
