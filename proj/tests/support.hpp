// SPDX-License-Identifier: Apache-2.0
//
// iox - wireless Internet-of-Experts over a JSON-RPC tool layer
// Copyright (C) 2026 The iox authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "iox/error.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

namespace test_support
{
    // Error kind raised by `fn`; fails the test when nothing is thrown.
    template <class Fn>
    iox::ErrorKind kind_of(Fn &&fn)
    {
        try
        {
            fn();
        }
        catch (const iox::Error &e)
        {
            return e.kind();
        }
        FAIL("no iox::Error thrown");
        return iox::ErrorKind::usage;
    }

    template <class Fn>
    std::string message_of(Fn &&fn)
    {
        try
        {
            fn();
        }
        catch (const std::exception &e)
        {
            return e.what();
        }
        return {};
    }

    class TempDir
    {
    public:
        TempDir()
        {
            static std::atomic<int> counter{0};
            path_ = std::filesystem::temp_directory_path() /
                    ("iox_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
            std::filesystem::remove_all(path_);
            std::filesystem::create_directories(path_);
        }
        ~TempDir()
        {
            std::error_code ec;
            std::filesystem::remove_all(path_, ec);
        }
        TempDir(const TempDir &) = delete;
        TempDir &operator=(const TempDir &) = delete;

        const std::filesystem::path &path() const { return path_; }
        std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

    private:
        std::filesystem::path path_;
    };

    inline std::string read_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    inline void write_file(const std::filesystem::path &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
}
