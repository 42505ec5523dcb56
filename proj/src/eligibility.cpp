#include "calib/eligibility.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "calib/parallel.hpp"

namespace calib {

SeriesGenerator market_generator(SimConfig base, ThetaSpace space) {
  return [base = std::move(base), space = std::move(space)](std::span<const double> theta,
                                                            std::uint64_t seed) {
    SimConfig cfg = space.apply(base, theta);
    cfg.seed = seed;
    return run_simulation(cfg);
  };
}

SampleSet simulate_block(const SeriesGenerator& generator, std::span<const double> theta,
                         SeedStream stream, std::uint64_t block, std::size_t count) {
  SampleSet out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(generator(theta, replication_seed(stream, block, i)));
  }
  return out;
}

std::string describe_theta(const std::vector<std::string>& names, std::span<const double> theta) {
  std::ostringstream os;
  os << std::setprecision(6) << '(';
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i) os << ", ";
    if (i < names.size()) os << names[i] << '=';
    os << theta[i];
  }
  os << ')';
  return os.str();
}

EligibilityMeta make_meta(const PreparedReference& real, std::size_t n_sim, double alpha,
                          std::vector<std::string> param_names) {
  EligibilityMeta m;
  m.alpha = alpha;
  m.n_real = real.size();
  m.n_sim = n_sim;
  m.dims = real.dims();
  m.extractor = real.extractor().name();
  m.param_names = std::move(param_names);
  return m;
}

EligibilityRecord evaluate_theta(const SeriesGenerator& generator, std::span<const double> theta,
                                 const PreparedReference& real, std::size_t n_sim, double alpha,
                                 std::uint64_t seed_block, SeedStream stream) {
  if (n_sim == 0) throw std::invalid_argument("n_sim must be >= 1");
  SampleSet sim;
  try {
    sim = simulate_block(generator, theta, stream, seed_block, n_sim);
  } catch (const std::exception& e) {
    throw std::runtime_error("simulation failed at theta " + describe_theta({}, theta) + ": " +
                             e.what());
  }
  EligibilityRecord rec;
  rec.theta.assign(theta.begin(), theta.end());
  rec.ks = ks_distance(real, sim, alpha);
  rec.n_sim = n_sim;
  rec.seed_block = seed_block;
  return rec;
}

GridScanResult grid_scan(const SeriesGenerator& generator,
                         const std::vector<std::vector<double>>& grid,
                         const PreparedReference& real, std::size_t n_sim, double alpha,
                         std::vector<std::string> param_names, const GridOptions& options) {
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  GridScanResult out;
  out.table.resize(grid.size());
  parallel_for(grid.size(), options.jobs, [&](std::size_t i) {
    const std::uint64_t block = options.shared_seeds ? options.first_block : options.first_block + i;
    out.table[i] = evaluate_theta(generator, grid[i], real, n_sim, alpha, block, SeedStream::grid);
  });
  for (const auto& rec : out.table) {
    if (rec.ks.eligible) out.eligible.records.push_back(rec);
  }
  out.eligible.meta = make_meta(real, n_sim, alpha, std::move(param_names));
  return out;
}

EligibilitySet collect_from_trace(std::span<const EligibilityRecord> trace, EligibilityMeta meta) {
  EligibilitySet out;
  out.meta = std::move(meta);
  std::map<std::vector<double>, std::size_t> seen;
  for (const auto& rec : trace) {
    if (!(rec.ks.statistic < rec.ks.critical_value)) continue;
    auto [it, inserted] = seen.emplace(rec.theta, out.records.size());
    if (inserted) {
      out.records.push_back(rec);
    } else if (rec.ks.statistic < out.records[it->second].ks.statistic) {
      out.records[it->second] = rec;
    }
  }
  return out;
}

void write_heatmap_csv(std::ostream& os, const std::vector<std::string>& param_names,
                       std::span<const EligibilityRecord> records) {
  for (const auto& n : param_names) os << n << ',';
  os << "ks_stat,eligible\n" << std::setprecision(17);
  for (const auto& r : records) {
    for (double v : r.theta) os << v << ',';
    os << r.ks.statistic << ',' << (r.ks.eligible ? 1 : 0) << '\n';
  }
}

std::vector<std::vector<double>> read_theta_csv(const std::string& path,
                                                const std::vector<std::string>& param_names) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("grid file is empty", path);
  const auto header = split_list(line);
  std::vector<std::size_t> column_of(param_names.size());
  for (std::size_t p = 0; p < param_names.size(); ++p) {
    auto it = std::find(header.begin(), header.end(), param_names[p]);
    if (it == header.end()) throw ConfigError("grid file lacks column", param_names[p], 1);
    column_of[p] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_list(line);
    if (cells.size() != header.size()) {
      throw ConfigError("grid row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()),
                        "grid", line_no);
    }
    std::vector<double> theta(param_names.size());
    for (std::size_t p = 0; p < param_names.size(); ++p) {
      theta[p] = parse_double(cells[column_of[p]], param_names[p], line_no);
    }
    rows.push_back(std::move(theta));
  }
  return rows;
}

}  // namespace calib
