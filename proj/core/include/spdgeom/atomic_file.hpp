#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "spdgeom/errors.hpp"

namespace spdgeom {

/// Write-to-temp plus atomic rename: a failed run never leaves a partial
/// output file behind.
class AtomicFile {
 public:
  AtomicFile(const std::string& path, std::ios::openmode mode = std::ios::out | std::ios::trunc)
      : final_path_(path), tmp_path_(path + ".tmp"), out_(tmp_path_, mode) {
    if (!out_) throw Error("cannot open '" + tmp_path_ + "' for writing");
  }

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_path_, ec);
    }
  }

  std::ofstream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw Error("write to '" + tmp_path_ + "' failed");
    out_.close();
    std::filesystem::rename(tmp_path_, final_path_);
    committed_ = true;
  }

 private:
  std::string final_path_;
  std::string tmp_path_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace spdgeom
