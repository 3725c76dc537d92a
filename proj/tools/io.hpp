#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mixrate/models.hpp"

namespace mixtool {

// unreadable, unwritable or unparseable file; mapped to exit code 4
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// shortest decimal string that round-trips the value
std::string fmt(double v);
std::string fmt(long long v);

// counts file: header "period,count", periods 1..m in order, counts >= 0
std::vector<long long> read_counts_csv(const std::string& path);

// claims file: header "period,amount", one row per claim, amounts > 0.
// Rows keep file order; the period label is returned with each amount.
std::vector<std::pair<long long, double>> read_claims_csv(
    const std::string& path);

// counts plus, when claims_path is nonempty, the claims grouped by their
// period labels. Every label must point at an existing period and each
// period must carry exactly as many claim rows as its count.
mixrate::ClaimHistory read_history(const std::string& counts_path,
                                   const std::string& claims_path);

// parameter files as written by the fit commands: either the bare object
// {"p": ..} / {"nu": ..} or any object with it nested under "params"
mixrate::FrequencyParams read_freq_params(const std::string& path);
mixrate::SeverityParams read_sev_params(const std::string& path);

// empty path writes to stdout
void write_text(const std::string& path, const std::string& body);

// row-by-row variant for outputs too large to assemble in memory
void write_stream(const std::string& path,
                  const std::function<void(std::ostream&)>& body);

// When args carries --config <file> (or --config=<file>), appends the
// file's key=value pairs as --key=value options, skipping keys already
// present in args so that explicit flags win. Lines that are blank or
// start with # are ignored.
std::vector<std::string> expand_config_args(std::vector<std::string> args);

}  // namespace mixtool
