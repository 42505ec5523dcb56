#include "calib/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "calib/params.hpp"

namespace calib {

std::size_t SimConfig::bucket_count() const noexcept {
  if (sampling_interval <= 0 || series_end <= series_start) return 0;
  return static_cast<std::size_t>((series_end - series_start) / sampling_interval);
}

void validate(const SimConfig& c) {
  for (std::size_t k = 0; k < c.value_groups.size(); ++k) {
    const auto& g = c.value_groups[k];
    const std::string suffix = std::to_string(k + 1);
    if (g.count < 0) throw ConfigError("agent count must be >= 0", "num_value_" + suffix);
    if (!(g.arrival_rate >= 0.0)) throw ConfigError("rate must be >= 0", "lambda_a_" + suffix);
    if (g.min_size <= 0) throw ConfigError("order size must be > 0", "min_size_value_" + suffix);
    if (g.min_size > g.max_size) {
      throw ConfigError("min size exceeds max size", "max_size_value_" + suffix);
    }
  }
  if (c.num_noise < 0) throw ConfigError("agent count must be >= 0", "num_noise");
  if (c.min_size_noise <= 0) throw ConfigError("order size must be > 0", "min_size_noise");
  if (c.min_size_noise > c.max_size_noise) {
    throw ConfigError("min size exceeds max size", "max_size_noise");
  }
  if (c.num_mm < 0) throw ConfigError("agent count must be >= 0", "num_mm");
  if (c.num_mm > 0 && c.mm_rate <= 0) throw ConfigError("interval must be > 0", "mm_rate");
  if (c.mm_size <= 0) throw ConfigError("order size must be > 0", "mm_size");
  if (c.mm_half_spread < 1) throw ConfigError("half spread must be >= 1 tick", "mm_half_spread");
  if (c.r_bar <= 0) throw ConfigError("fundamental mean must be > 0", "r_bar");
  if (!(c.kappa >= 0.0)) throw ConfigError("mean reversion must be >= 0", "kappa");
  if (!(c.fund_vol >= 0.0)) throw ConfigError("volatility must be >= 0", "fund_vol");
  if (!(c.value_obs_noise >= 0.0)) throw ConfigError("noise must be >= 0", "value_obs_noise");
  if (c.value_price_improvement < 0) {
    throw ConfigError("improvement must be >= 0", "value_price_improvement");
  }
  if (c.seed_order_size <= 0) throw ConfigError("order size must be > 0", "seed_order_size");
  if (c.session_open >= c.session_close) {
    throw ConfigError("session_open must precede session_close", "session_close");
  }
  if (c.series_start >= c.series_end) {
    throw ConfigError("series_start must precede series_end", "series_end");
  }
  if (c.series_start < c.session_open || c.series_end > c.session_close) {
    throw ConfigError("series window must lie inside the session", "series_start");
  }
  if (c.sampling_interval <= 0) throw ConfigError("interval must be > 0", "sampling_interval");
  if (c.bucket_count() == 0) {
    throw ConfigError("series window shorter than one bucket", "sampling_interval");
  }
}

namespace {

SimTime parse_clock(const std::string& text, std::string_view key, std::size_t line) {
  if (text.find(':') == std::string::npos) return parse_int(text, key, line);
  const auto parts = split_list(text, ':');
  if (parts.size() < 2 || parts.size() > 3) {
    throw ConfigError("clock must be HH:MM[:SS]", std::string(key), line);
  }
  const SimTime h = parse_int(parts[0], key, line);
  const SimTime m = parse_int(parts[1], key, line);
  const double s = parts.size() == 3 ? parse_double(parts[2], key, line) : 0.0;
  return h * kNanosPerHour + m * kNanosPerMinute + std::llround(s * kNanosPerSecond);
}

SimTime parse_duration(const std::string& text, std::string_view key, std::size_t line) {
  static const std::pair<std::string_view, double> units[] = {
      {"min", 60e9}, {"ms", 1e6}, {"us", 1e3}, {"ns", 1.0}, {"s", 1e9}};
  for (const auto& [suffix, scale] : units) {
    if (text.size() > suffix.size() && text.ends_with(suffix)) {
      const double v = parse_double(text.substr(0, text.size() - suffix.size()), key, line);
      return std::llround(v * scale);
    }
  }
  return parse_int(text, key, line);
}

std::string format_clock(SimTime t) {
  std::ostringstream os;
  const SimTime h = t / kNanosPerHour;
  const SimTime m = (t % kNanosPerHour) / kNanosPerMinute;
  const SimTime ns = t % kNanosPerMinute;
  os << std::setfill('0') << std::setw(2) << h << ':' << std::setw(2) << m << ':' << std::setw(2)
     << ns / kNanosPerSecond;
  if (ns % kNanosPerSecond != 0) return std::to_string(t);
  return os.str();
}

}  // namespace

SimConfig load_sim_config(const KvFile& kv, SimConfig base, bool allow_unknown) {
  for (const auto& [key, entry] : kv.entries()) {
    if (key == "seed") {
      const long long s = parse_int(entry.value, key, entry.line);
      if (s < 0) throw ConfigError("seed must be >= 0", key, entry.line);
      base.seed = static_cast<std::uint64_t>(s);
      continue;
    }
    const ParamInfo* info = find_param(key);
    if (info == nullptr) {
      if (allow_unknown) continue;
      throw ConfigError("unknown key", key, entry.line);
    }
    double v = 0.0;
    switch (info->kind) {
      case ParamKind::clock:
        v = static_cast<double>(parse_clock(entry.value, key, entry.line));
        break;
      case ParamKind::duration:
        v = static_cast<double>(parse_duration(entry.value, key, entry.line));
        break;
      case ParamKind::count:
      case ParamKind::size:
      case ParamKind::price:
        v = static_cast<double>(parse_int(entry.value, key, entry.line));
        break;
      case ParamKind::rate:
      case ParamKind::real:
        v = parse_double(entry.value, key, entry.line);
        break;
    }
    info->set(base, v);
  }
  try {
    validate(base);
  } catch (const ConfigError& e) {
    const auto* entry = kv.find(e.key());
    throw ConfigError(e.message(), e.key(), entry ? entry->line : 0);
  }
  return base;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return load_sim_config(KvFile::load(path));
}

std::string format_sim_config(const SimConfig& config) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& p : all_params()) {
    os << p.name << " = ";
    const double v = p.get(config);
    if (p.kind == ParamKind::clock) {
      os << format_clock(static_cast<SimTime>(v));
    } else if (p.kind == ParamKind::rate || p.kind == ParamKind::real) {
      os << format_number(v);
    } else {
      os << static_cast<long long>(v);
    }
    os << '\n';
  }
  os << "seed = " << config.seed << '\n';
  return os.str();
}

FundamentalState step_fundamental(const FundamentalState& state, SimTime dt, double noise,
                                  double r_bar, double kappa, double fund_vol) {
  if (dt <= 0) return state;
  const double t = static_cast<double>(dt);
  const double pull = std::min(kappa * t, 1.0);
  double next = state.value + pull * (r_bar - state.value) + fund_vol * std::sqrt(t) * noise;
  next = std::max(next, 1.0);
  return FundamentalState{next, state.time + dt};
}

SeriesSample extract_series(std::span<const Trade> trades, std::span<const MidPoint> mid_history,
                            const SimConfig& config) {
  const std::size_t buckets = config.bucket_count();
  SeriesSample out;
  out.values.assign(2 * buckets, 0.0);
  if (buckets == 0) return out;

  // Mid in force strictly before time t: last recorded mid with time < t.
  const double fallback = static_cast<double>(config.r_bar);
  std::size_t cursor = 0;
  double current = fallback;
  auto mid_before = [&](SimTime t) {
    while (cursor < mid_history.size() && mid_history[cursor].time < t) {
      current = mid_history[cursor].mid;
      ++cursor;
    }
    return current;
  };

  double prev = mid_before(config.series_start);
  for (std::size_t b = 0; b < buckets; ++b) {
    const SimTime end = config.series_start + static_cast<SimTime>(b + 1) * config.sampling_interval;
    const double next = mid_before(end);
    out.values[b] = (next > 0.0 && prev > 0.0) ? std::log(next) - std::log(prev) : 0.0;
    prev = next;
  }

  const SimTime window_end =
      config.series_start + static_cast<SimTime>(buckets) * config.sampling_interval;
  for (const auto& t : trades) {
    if (t.time < config.series_start || t.time >= window_end) continue;
    const auto b = static_cast<std::size_t>((t.time - config.series_start) / config.sampling_interval);
    out.values[buckets + b] += static_cast<double>(t.size);
  }
  return out;
}

namespace {

enum class AgentKind : std::uint8_t { seeder, value, noise, market_maker };

struct Wake {
  SimTime time;
  std::uint64_t seq;
  AgentKind kind;
  std::int32_t agent;
  std::int32_t group;

  bool operator>(const Wake& o) const noexcept {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

class MarketRun {
 public:
  explicit MarketRun(const SimConfig& config)
      : cfg_(config),
        rng_(make_rng(config.seed)),
        fundamental_{double(config.r_bar), config.session_open},
        last_mid_(double(config.r_bar)) {}

  SimulationResult run() {
    schedule_initial();
    while (!queue_.empty()) {
      const Wake w = queue_.top();
      queue_.pop();
      if (w.time >= cfg_.session_close) break;
      now_ = w.time;
      switch (w.kind) {
        case AgentKind::seeder: seed_book(); break;
        case AgentKind::value: value_wake(w); break;
        case AgentKind::noise: noise_wake(); break;
        case AgentKind::market_maker: market_maker_wake(w); break;
      }
      record_mid();
    }
    SimulationResult result;
    result.trades = book_.trade_log();
    result.mid_history = std::move(mids_);
    result.fundamental_path = std::move(fundamental_path_);
    result.sample = extract_series(result.trades, result.mid_history, cfg_);
    return result;
  }

 private:
  static std::mt19937_64 make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
    return std::mt19937_64(seq);
  }

  void push(SimTime t, AgentKind kind, std::int32_t agent, std::int32_t group = 0) {
    queue_.push(Wake{t, seq_++, kind, agent, group});
  }

  SimTime exponential_gap(double rate) {
    std::exponential_distribution<double> gap(rate);
    const double g = std::ceil(gap(rng_));
    if (!(g < 1e18)) return std::numeric_limits<SimTime>::max() / 2;
    return static_cast<SimTime>(std::max(g, 1.0));
  }

  void schedule_initial() {
    push(cfg_.session_open, AgentKind::seeder, -1);
    std::int32_t agent = 0;
    for (std::int32_t g = 0; g < std::int32_t(cfg_.value_groups.size()); ++g) {
      const auto& grp = cfg_.value_groups[g];
      for (int i = 0; i < grp.count; ++i, ++agent) {
        if (grp.arrival_rate <= 0.0) continue;
        const SimTime gap = exponential_gap(grp.arrival_rate);
        if (gap < cfg_.session_close - cfg_.session_open) {
          push(cfg_.session_open + gap, AgentKind::value, agent, g);
        }
      }
    }
    std::uniform_int_distribution<SimTime> day(cfg_.session_open, cfg_.session_close - 1);
    for (int i = 0; i < cfg_.num_noise; ++i, ++agent) push(day(rng_), AgentKind::noise, agent);
    for (int i = 0; i < cfg_.num_mm; ++i, ++agent) {
      const SimTime offset = cfg_.mm_rate * i / std::max(cfg_.num_mm, 1);
      mm_quotes_.emplace_back();
      push(cfg_.session_open + offset, AgentKind::market_maker, agent, i);
    }
  }

  OrderId next_id() { return ++last_id_; }

  void submit_limit(Side side, Price price, Qty size, std::int32_t agent) {
    Order o;
    o.id = next_id();
    o.side = side;
    o.kind = OrderKind::limit;
    o.price = std::max<Price>(price, 1);
    o.size = size;
    o.timestamp = now_;
    o.agent_id = agent;
    book_.submit(o);
  }

  double reference_mid() const {
    if (auto m = book_.mid()) return *m;
    return last_mid_;
  }

  void record_mid() {
    if (auto m = book_.mid(); m && *m != last_mid_) {
      last_mid_ = *m;
      mids_.push_back(MidPoint{now_, *m});
    }
  }

  void seed_book() {
    submit_limit(Side::bid, cfg_.r_bar - cfg_.mm_half_spread, cfg_.seed_order_size, -1);
    submit_limit(Side::ask, cfg_.r_bar + cfg_.mm_half_spread, cfg_.seed_order_size, -1);
  }

  void advance_fundamental() {
    std::normal_distribution<double> z;
    fundamental_ = step_fundamental(fundamental_, now_ - fundamental_.time, z(rng_),
                                    double(cfg_.r_bar), cfg_.kappa, cfg_.fund_vol);
    fundamental_.time = now_;
    fundamental_path_.push_back(fundamental_.value);
  }

  void value_wake(const Wake& w) {
    const auto& grp = cfg_.value_groups[w.group];
    advance_fundamental();
    std::normal_distribution<double> obs_noise(0.0, cfg_.value_obs_noise * double(cfg_.r_bar));
    const double observed = fundamental_.value + obs_noise(rng_);
    std::uniform_int_distribution<Qty> size(grp.min_size, grp.max_size);
    const Qty qty = size(rng_);
    const double mid = reference_mid();
    if (observed > mid) {
      const auto ask = book_.best_ask();
      const Price px = ask ? *ask - cfg_.value_price_improvement : std::llround(mid) + 1;
      submit_limit(Side::bid, px, qty, w.agent);
    } else if (observed < mid) {
      const auto bid = book_.best_bid();
      const Price px = bid ? *bid + cfg_.value_price_improvement : std::llround(mid) - 1;
      submit_limit(Side::ask, px, qty, w.agent);
    }
    const SimTime gap = exponential_gap(grp.arrival_rate);
    if (gap < cfg_.session_close - now_) push(now_ + gap, AgentKind::value, w.agent, w.group);
  }

  void noise_wake() {
    std::bernoulli_distribution buy(0.5);
    std::uniform_int_distribution<Qty> size(cfg_.min_size_noise, cfg_.max_size_noise);
    const Side side = buy(rng_) ? Side::bid : Side::ask;
    Order o;
    o.id = next_id();
    o.side = side;
    o.kind = OrderKind::market;
    o.size = size(rng_);
    o.timestamp = now_;
    book_.submit(o);
  }

  void market_maker_wake(const Wake& w) {
    const double mid = reference_mid();
    auto& quotes = mm_quotes_[w.group];
    for (OrderId id : quotes) book_.cancel(id);
    quotes.clear();
    const Price center = std::llround(mid);
    const OrderId bid_id = last_id_ + 1;
    submit_limit(Side::bid, center - cfg_.mm_half_spread, cfg_.mm_size, w.agent);
    const OrderId ask_id = last_id_ + 1;
    submit_limit(Side::ask, center + cfg_.mm_half_spread, cfg_.mm_size, w.agent);
    quotes = {bid_id, ask_id};
    push(now_ + cfg_.mm_rate, AgentKind::market_maker, w.agent, w.group);
  }

  const SimConfig& cfg_;
  std::mt19937_64 rng_;
  OrderBook book_;
  std::priority_queue<Wake, std::vector<Wake>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  OrderId last_id_ = 0;
  SimTime now_ = 0;
  FundamentalState fundamental_;
  double last_mid_;
  std::vector<MidPoint> mids_;
  std::vector<double> fundamental_path_;
  std::vector<std::vector<OrderId>> mm_quotes_;
};

}  // namespace

SimulationResult run_simulation_detailed(const SimConfig& config) {
  validate(config);
  MarketRun run(config);
  return run.run();
}

SeriesSample run_simulation(const SimConfig& config) {
  return run_simulation_detailed(config).sample;
}

void write_samples_csv(std::ostream& os, const SampleSet& samples) {
  const std::size_t buckets = samples.empty() ? 0 : samples.front().buckets();
  for (std::size_t b = 0; b < buckets; ++b) os << (b ? "," : "") << "r_" << b;
  for (std::size_t b = 0; b < buckets; ++b) os << ",v_" << b;
  os << '\n';
  os << std::setprecision(17);
  for (const auto& s : samples) {
    if (s.values.size() != 2 * buckets) throw std::invalid_argument("ragged sample set");
    for (std::size_t i = 0; i < s.values.size(); ++i) os << (i ? "," : "") << s.values[i];
    os << '\n';
  }
}

void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_samples_csv(out, samples);
}

SampleSet read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty sample file");
  const std::size_t width = split_list(line).size();
  SampleSet out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    SeriesSample s;
    for (const auto& cell : split_list(line)) s.values.push_back(parse_double(cell, "sample", line_no));
    if (s.values.size() != width) {
      throw ConfigError("row width does not match header", "sample", line_no);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace calib
