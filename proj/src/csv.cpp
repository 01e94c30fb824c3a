#include "prunelab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace prunelab {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string census_string(const std::vector<Index>& census) {
  std::ostringstream os;
  for (std::size_t i = 0; i < census.size(); ++i) {
    if (i > 0) os << ';';
    os << census[i];
  }
  return os.str();
}

std::string scenario_csv(const statmodel::ScenarioEstimates& est) {
  std::ostringstream os;
  os << "scenario,estimate,half_width\n";
  const auto row = [&](const char* name, const statmodel::EstimateWithCI& e) {
    os << name << ',' << format_real(e.value) << ',' << format_real(e.half_width) << '\n';
  };
  row("v_o", est.v_o);
  row("v_sr", est.v_sr);
  row("v_sl", est.v_sl);
  row("v_fl", est.v_fl);
  row("v_gl", est.v_gl);
  return os.str();
}

std::string sweep_csv(const std::vector<statmodel::SweepRow>& rows) {
  std::ostringstream os;
  os << "n,empirical_lhs,chebyshev_rhs\n";
  for (const auto& r : rows)
    os << r.n << ',' << format_real(r.empirical_lhs) << ',' << format_real(r.chebyshev_rhs)
       << '\n';
  return os.str();
}

std::string trajectory_csv(const std::string& strategy_name, const PruneSchedule& schedule,
                           const std::vector<TrajectoryPoint>& points) {
  std::ostringstream os;
  os << "# strategy = " << strategy_name << "\n";
  os << "# schedule = filters_per_step:" << schedule.filters_per_step
     << " finetune_updates:" << schedule.finetune_updates << " batch_size:" << schedule.batch_size
     << " total_steps:" << schedule.total_steps << " stop_fraction:"
     << format_real(schedule.stop_fraction) << " repetitions:" << schedule.repetitions
     << " finetune_lr:" << format_real(schedule.finetune_lr) << "\n";
  os << "step,cum_pruned,frac_pruned,accuracy_mean,accuracy_std,layer_census\n";
  for (const auto& p : points) {
    os << p.step << ',' << p.cum_pruned << ',' << format_real(p.frac_pruned) << ','
       << format_real(p.accuracy_mean) << ',' << format_real(p.accuracy_std) << ','
       << census_string(p.census) << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);  // binary: keep LF endings
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw InvalidArgument("short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace prunelab
