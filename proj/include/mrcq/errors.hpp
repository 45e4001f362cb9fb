// Copyright 2026 The MRCQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mrcq {

// Root of every error raised by the library. The CLI maps these to exit
// code 1 (user error); anything else escaping is treated as internal.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// A softmax row (or attention query) with no admissible entry.
class DegenerateMaskError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class LengthError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key_path, const std::string& what)
        : Error("config key '" + key_path + "': " + what), key_path_(key_path) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

class NonFiniteLossError : public Error {
public:
    NonFiniteLossError(const std::string& what, std::int64_t step, std::string batch_id)
        : Error(what), step_(step), batch_id_(std::move(batch_id)) {}

    std::int64_t step() const noexcept { return step_; }
    const std::string& batch_id() const noexcept { return batch_id_; }

private:
    std::int64_t step_;
    std::string batch_id_;
};

}  // namespace mrcq
