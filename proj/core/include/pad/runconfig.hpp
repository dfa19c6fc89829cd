// Flat key=value run configuration.  Keys mirror the model's hyperparameter
// names exactly; unknown keys are rejected, values are canonicalized on parse
// so load -> dump -> load is an identity, and files may pull in other files
// with an `include <path>` line.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pad {

class RunConfig {
 public:
  enum class Kind { integer, real, boolean, text, int_list, text_list };
  struct KeySpec {
    const char* name;
    Kind kind;
    const char* def;
  };
  static const std::vector<KeySpec>& known_keys();

  static RunConfig defaults();
  // "paper" is the defaults; "desk" is the reduced-scale configuration sized
  // for CPU-minute training runs.
  static RunConfig preset(const std::string& name);
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_string(const std::string& text,
                               const std::filesystem::path& base_dir = ".");

  // Parse onto the current values (only keys named in the text change).
  void apply_file(const std::filesystem::path& path);
  void apply_string(const std::string& text, const std::filesystem::path& base_dir = ".");

  void set(const std::string& key, const std::string& value);
  void merge(const RunConfig& over) {
    for (const auto& [k, v] : over.values_) values_[k] = v;
  }

  std::string dump() const;  // canonical key order and value spelling
  void save(const std::filesystem::path& path) const;

  long long geti(const std::string& key) const;
  double getd(const std::string& key) const;
  bool getb(const std::string& key) const;
  const std::string& gets(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<std::string> get_text_list(const std::string& key) const;

  std::uint64_t seed(const std::string& key) const;  // nonnegative geti

  // cross-field sanity (dims chaining, positive sizes, ratios in range)
  void validate() const;

 private:
  const KeySpec& spec_of(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace pad
