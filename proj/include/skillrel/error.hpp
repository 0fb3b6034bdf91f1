#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace skillrel {

// Category strings double as the machine-parseable error codes the CLI
// prints on stderr before exiting 1.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

inline Error io_error(const std::string& what) { return {"io-error", what}; }
inline Error parse_error(const std::string& what) { return {"parse-error", what}; }
inline Error config_error(const std::string& what) { return {"config-error", what}; }
inline Error empty_input_error(const std::string& what) { return {"empty-input", what}; }
inline Error capacity_error(const std::string& what) { return {"capacity-error", what}; }
inline Error assembly_error(const std::string& what) { return {"assembly-error", what}; }
inline Error auth_error(const std::string& what) { return {"auth-error", what}; }
inline Error endpoint_error(const std::string& what) { return {"endpoint-error", what}; }
inline Error extraction_error(const std::string& what) { return {"extraction-error", what}; }
inline Error metric_error(const std::string& what) { return {"metric-error", what}; }
inline Error oov_error(const std::string& what) { return {"oov-error", what}; }
inline Error numeric_error(const std::string& what) { return {"numeric-error", what}; }

}  // namespace skillrel
