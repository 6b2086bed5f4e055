#pragma once

#include "sltgp/slt.hpp"

#include <iosfwd>
#include <string>

namespace sltgp {

/// Text record, one key per line, floats as C99 hex literals so a round trip is exact:
///
///   sltgp-model 1
///   kernel <family> <log_length_scale> <log_amplitude> <log_signal_variance>
///   rho <value>
///   shape <n> <d>
///   inputs <n*d values, row-major>
///   labels <n values>
///   soft_labels <n values>
///   site_nu <n values>
///   site_tau <n values>
///   converged <0|1>
///   sweeps <count>
///   end
///
/// Loading rebuilds the posterior from the stored sites without rerunning EP.
void save_model(const SltModel& model, std::ostream& out);
SltModel load_model(std::istream& in);

void save_model_file(const SltModel& model, const std::string& path);
SltModel load_model_file(const std::string& path);

}  // namespace sltgp
