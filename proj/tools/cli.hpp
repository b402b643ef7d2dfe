#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace favar::cli {

/// Flat key/value run configuration. Keys are the long flag names without
/// dashes; the file form is one `key = value` per line with `#` comments.
class RunConfig {
 public:
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  /// Sets `key` only when it has no value yet.
  void set_default(const std::string& key, std::string value);

  std::string get(const std::string& key, const std::string& fallback = "") const;
  long get_int(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback = false) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string serialise() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Entry point shared by the favar executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace favar::cli
