// SPDX-License-Identifier: Apache-2.0
//
// radfuse - multi-radar respiratory sensing and signal fusion
// Copyright (C) 2026 The radfuse authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radfuse
{

// Base class for every error raised by the library. Subclasses map onto the
// failure kinds callers need to tell apart (the CLI turns them into exit codes).
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class InvalidInput : public Error
{
public:
    using Error::Error;
};

class InvalidScenario : public Error
{
public:
    using Error::Error;
};

// The power map holds no energy, so there is no scatterer to track.
class NoTarget : public Error
{
public:
    using Error::Error;
};

// The mode closest to the expected breathing rate lies outside the respiratory band.
class NoRespiratoryMode : public Error
{
public:
    using Error::Error;
};

class InsufficientPeaks : public Error
{
public:
    using Error::Error;
};

class NoMatches : public Error
{
public:
    using Error::Error;
};

class IoError : public Error
{
public:
    using Error::Error;
};

// Malformed file content. Carries the byte offset where decoding failed.
class ParseError : public Error
{
public:
    ParseError(const std::string &what, std::size_t byte_offset)
        : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"), offset_(byte_offset)
    {
    }

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

namespace detail
{
inline void require(bool condition, const std::string &message)
{
    if (!condition)
        throw InvalidInput(message);
}
} // namespace detail

} // namespace radfuse
