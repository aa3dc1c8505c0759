// Copyright 2026 The prefrank Authors
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

#include <fcntl.h>
#include <unistd.h>

#include <filesystem>
#include <string>

#include "prefrank/core/common.hpp"

namespace prefrank {

// Exclusive advisory lock on an output directory, held for the lifetime of
// the object. Creation fails if another process already holds the lock
// (O_CREAT|O_EXCL on a marker file). Stale locks from crashed runs must be
// removed by hand; the error message names the file.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    path_ = dir / ".prefrank.lock";
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw ConfigError("output directory '" + dir.string() +
                        "' is locked by another run; remove '" + path_.string() +
                        "' if no other process is active");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    ssize_t written = ::write(fd_, pid.data(), pid.size());
    (void)written;
  }

  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;
  DirLock(DirLock&& other) noexcept : fd_(other.fd_), path_(std::move(other.path_)) {
    other.fd_ = -1;
  }

  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }

 private:
  int fd_ = -1;
  std::filesystem::path path_;
};

}  // namespace prefrank
