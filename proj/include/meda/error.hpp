/*
 * Copyright 2026 The meda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <stdexcept>
#include <string>

namespace meda {

/// Broad failure classes. The CLI maps each one onto a process exit code.
enum class ErrorCategory { parse = 2, dimension = 3, numerical = 4, io = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

#define MEDA_DEFINE_ERROR(Name, Category)                                   \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(Category, what) {}   \
    }

MEDA_DEFINE_ERROR(ParseError, ErrorCategory::parse);
MEDA_DEFINE_ERROR(InvalidArgument, ErrorCategory::parse);
MEDA_DEFINE_ERROR(DimensionError, ErrorCategory::dimension);
MEDA_DEFINE_ERROR(EmptyInputError, ErrorCategory::dimension);
MEDA_DEFINE_ERROR(InsufficientDataError, ErrorCategory::dimension);
MEDA_DEFINE_ERROR(ConvergenceError, ErrorCategory::numerical);
MEDA_DEFINE_ERROR(DegenerateError, ErrorCategory::numerical);
MEDA_DEFINE_ERROR(SingularSystemError, ErrorCategory::numerical);
MEDA_DEFINE_ERROR(IoError, ErrorCategory::io);

#undef MEDA_DEFINE_ERROR

}  // namespace meda
