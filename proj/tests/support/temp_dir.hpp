#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "mmeval/error.hpp"

namespace mmtest {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "mmeval") {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / (prefix + ".XXXXXX")).string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw mm::IoError("mkdtemp failed");
    path_ = tmpl;
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace mmtest
