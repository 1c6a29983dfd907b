// Copyright (c) 2026 The convasr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONVASR_ERROR_H_
#define CONVASR_ERROR_H_

#include <stdexcept>
#include <string>

namespace convasr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-side precondition was violated (empty input, bad threshold, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data. `line` is 1-based, 0 when unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::string path = {}, size_t line = 0)
      : Error(Format(what, path, line)), path_(std::move(path)), line_(line) {}

  const std::string& path() const { return path_; }
  size_t line() const { return line_; }

 private:
  static std::string Format(const std::string& what, const std::string& path,
                            size_t line) {
    std::string out;
    if (!path.empty()) out += path;
    if (line > 0) out += (out.empty() ? "line " : ":") + std::to_string(line);
    if (!out.empty()) out += ": ";
    return out + what;
  }

  std::string path_;
  size_t line_;
};

// Failure talking to a chat or embedding backend.
class BackendError : public Error {
 public:
  enum class Kind {
    kTransient,   // timeouts, 429, 5xx; retried
    kAuth,        // 401/403, missing credentials
    kMalformed,   // provider answered with something we cannot parse
    kRequest,     // provider rejected the request (other 4xx)
    kUnscripted,  // stub has no answer for the request
    kOffline,     // network access attempted in offline mode
  };

  BackendError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }
  bool transient() const { return kind_ == Kind::kTransient; }

 private:
  Kind kind_;
};

// The judge answered but neither "yes" nor "no" could be found.
class UnparseableVerdict : public Error {
 public:
  explicit UnparseableVerdict(std::string raw)
      : Error("unparseable verdict: \"" + raw + "\""), raw_(std::move(raw)) {}

  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

}  // namespace convasr

#endif  // CONVASR_ERROR_H_
