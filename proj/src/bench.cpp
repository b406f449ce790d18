#include "chemdim/bench.hpp"

#include "chemdim/baselines.hpp"
#include "chemdim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace chemdim {

std::map<Index, int> BenchResult::counts(Index method, Index spec) const {
  std::map<Index, int> out;
  for (const auto& cell : cells) {
    if (cell.spec != spec) continue;
    const auto& est = cell.estimates[static_cast<size_t>(method)];
    if (est) ++out[*est];
    else ++out[cell.errors[static_cast<size_t>(method)].empty() ? -1 : -2];
  }
  return out;
}

std::uint64_t repeat_seed(std::uint64_t spec_seed, int repeat) {
  return mix_seed(spec_seed, 0x100 + static_cast<std::uint64_t>(repeat));
}

BenchResult run_benchmark(const BenchConfig& config) {
  if (config.repeats < 1) throw ValidationError("bench: repeats must be >= 1");
  if (config.grid.empty()) throw ValidationError("bench: empty grid");
  if (config.methods.empty()) throw ValidationError("bench: no methods");
  std::vector<std::string> baseline_names;
  for (const auto& m : config.methods) {
    if (m == "cd") continue;
    if (std::find(baseline_methods().begin(), baseline_methods().end(), m) == baseline_methods().end())
      throw ValidationError("bench: unknown method '" + m + "'");
    baseline_names.push_back(m);
  }
  const auto methods = static_cast<Index>(config.methods.size());
  const auto repeats = static_cast<size_t>(config.repeats);

  BenchResult result;
  result.config = config;
  result.cells.resize(config.grid.size() * repeats);
  for (size_t s = 0; s < config.grid.size(); ++s) {
    const SyntheticSpec& spec = config.grid[s];
    std::vector<BenchCell> cells(repeats);
    for (size_t r = 0; r < repeats; ++r) {
      cells[r].spec = static_cast<Index>(s);
      cells[r].repeat = static_cast<int>(r);
      cells[r].algorithm_seed = repeat_seed(spec.seed, static_cast<int>(r));
      cells[r].estimates.assign(static_cast<size_t>(methods), std::nullopt);
      cells[r].errors.assign(static_cast<size_t>(methods), "");
    }
    auto fail_all = [&](Index method, const std::string& what) {
      for (auto& c : cells) c.errors[static_cast<size_t>(method)] = what.empty() ? "failed" : what;
    };

    std::optional<SyntheticDataset> data;
    try {
      data = generate(spec);
    } catch (const std::exception& e) {
      for (Index m = 0; m < methods; ++m) fail_all(m, e.what());
    }

    if (data && !baseline_names.empty()) {
      try {
        const auto results = run_baselines(data->noisy.values(), baseline_names, config.false_alarm);
        size_t next = 0;
        for (Index m = 0; m < methods; ++m) {
          if (config.methods[static_cast<size_t>(m)] == "cd") continue;
          const auto& br = results[next++];
          for (auto& c : cells) c.estimates[static_cast<size_t>(m)] = br.dimensionality;
        }
      } catch (const std::exception& e) {
        for (Index m = 0; m < methods; ++m)
          if (config.methods[static_cast<size_t>(m)] != "cd") fail_all(m, e.what());
      }
    }

    const auto cd = std::find(config.methods.begin(), config.methods.end(), "cd");
    if (data && cd != config.methods.end()) {
      const auto m = static_cast<size_t>(cd - config.methods.begin());
      std::optional<PreparedData> prepared;
      try {
        prepared = prepare(data->noisy, config.params);
      } catch (const std::exception& e) {
        fail_all(static_cast<Index>(m), e.what());
      }
      if (prepared) {
        parallel_for(repeats, [&](std::size_t r) {
          try {
            cells[r].estimates[m] = estimate(*prepared, cells[r].algorithm_seed, config.params).k_cd();
          } catch (const std::exception& e) {
            cells[r].errors[m] = e.what();
          }
        });
      }
    }
    std::move(cells.begin(), cells.end(), result.cells.begin() + static_cast<std::ptrdiff_t>(s * repeats));
  }
  return result;
}

namespace {

std::string spec_prefix(const SyntheticSpec& spec) {
  std::ostringstream out;
  out << spec.k << ',' << spec.n << ',' << spec.p << ',' << io::format_double(spec.snr);
  return out.str();
}

}  // namespace

std::string confusion_csv(const BenchResult& result, Index method) {
  const auto specs = static_cast<Index>(result.config.grid.size());
  std::set<Index> observed;
  for (Index s = 0; s < specs; ++s)
    for (const auto& [value, count] : result.counts(method, s))
      if (value >= 0) observed.insert(value);
  std::ostringstream out;
  out << "k,n,p,snr";
  for (Index v : observed) out << ',' << v;
  out << ",undefined,failed\n";
  for (Index s = 0; s < specs; ++s) {
    const auto counts = result.counts(method, s);
    auto get = [&](Index key) {
      const auto it = counts.find(key);
      return it == counts.end() ? 0 : it->second;
    };
    out << spec_prefix(result.config.grid[static_cast<size_t>(s)]);
    for (Index v : observed) out << ',' << get(v);
    out << ',' << get(-1) << ',' << get(-2) << '\n';
  }
  return out.str();
}

std::string comparison_csv(const BenchResult& result) {
  const auto specs = static_cast<Index>(result.config.grid.size());
  std::ostringstream out;
  out << "k,n,p,snr";
  for (const auto& m : result.config.methods) out << ',' << m;
  out << '\n';
  for (Index s = 0; s < specs; ++s) {
    out << spec_prefix(result.config.grid[static_cast<size_t>(s)]);
    for (Index m = 0; m < static_cast<Index>(result.config.methods.size()); ++m) {
      const auto counts = result.counts(m, s);
      Index mode = -1;
      int best = -1, total = 0;
      for (const auto& [value, count] : counts) {
        total += count;
        if (count > best) {
          best = count;
          mode = value;
        }
      }
      const std::string label = mode == -1 ? "--" : (mode == -2 ? "failed" : std::to_string(mode));
      out << ',' << label;
      if (best < total) out << '(' << std::lround(100.0 * best / total) << "%)";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

template <class T>
std::vector<T> one_or_many(const io::json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return {fallback};
  const auto& v = doc.at(key);
  if (v.is_array()) {
    if (v.empty()) throw ValidationError(std::string("grid: '") + key + "' is empty");
    return v.get<std::vector<T>>();
  }
  return {v.get<T>()};
}

SyntheticSpec spec_from_json(const io::json& e, std::uint64_t default_seed) {
  SyntheticSpec s;
  s.k = e.value("k", s.k);
  s.n = e.value("n", s.n);
  s.p = e.value("p", s.p);
  s.axis_first = e.value("axis_first", s.axis_first);
  s.axis_last = e.value("axis_last", s.axis_last);
  s.snr = e.value("snr", s.snr);
  s.seed = e.value("seed", default_seed);
  s.normalize_endmembers = e.value("normalize_endmembers", s.normalize_endmembers);
  return s;
}

}  // namespace

std::vector<SyntheticSpec> grid_from_json(const io::json& doc) {
  try {
    if (!doc.is_object()) throw ValidationError("grid: expected a JSON object");
    const auto base = doc.value("seed", std::uint64_t{0});
    std::vector<SyntheticSpec> out;
    if (doc.contains("specs")) {
      for (const auto& e : doc.at("specs")) out.push_back(spec_from_json(e, mix_seed(base, out.size())));
    } else {
      SyntheticSpec defaults;
      for (double snr : one_or_many(doc, "snr", defaults.snr))
        for (Index n : one_or_many(doc, "n", defaults.n))
          for (Index p : one_or_many(doc, "p", defaults.p))
            for (Index k : one_or_many(doc, "k", defaults.k)) {
              io::json e = {{"k", k}, {"n", n}, {"p", p}, {"snr", snr}};
              for (const char* key : {"axis_first", "axis_last", "normalize_endmembers"})
                if (doc.contains(key)) e[key] = doc.at(key);
              out.push_back(spec_from_json(e, mix_seed(base, out.size())));
            }
    }
    for (const auto& s : out)
      if (s.k < 2 || s.n < s.k || !(s.snr > 0.0) || s.p < 3) throw ValidationError("grid: invalid spec (k=" + std::to_string(s.k) + ")");
    if (out.empty()) throw ValidationError("grid: no specs");
    return out;
  } catch (const io::json::exception& e) {
    throw ValidationError(std::string("grid: ") + e.what());
  }
}

io::json spec_to_json(const SyntheticSpec& spec) {
  return {{"k", spec.k},
          {"n", spec.n},
          {"p", spec.p},
          {"axis_first", spec.axis_first},
          {"axis_last", spec.axis_last},
          {"snr", spec.snr},
          {"seed", spec.seed},
          {"normalize_endmembers", spec.normalize_endmembers}};
}

}  // namespace chemdim
