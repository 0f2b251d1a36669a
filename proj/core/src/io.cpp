#include "slt/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slt/rng.hpp"

namespace slt {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

long parse_long(const std::string& s, int line, const std::string& field) {
  try {
    size_t pos = 0;
    const long v = std::stol(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + field + "' is not an integer: '" + s + "'",
                      line, field);
  }
}

std::uint64_t parse_u64(const std::string& s, int line,
                        const std::string& field) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + field + "' is not an unsigned integer: '" +
                          s + "'",
                      line, field);
  }
}

bool parse_bool(const std::string& s, int line, const std::string& field) {
  const std::string v = trim(s);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("field '" + field + "' is not a boolean: '" + s + "'",
                    line, field);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return f;
}

ordered_json estimate_json(const Estimate& e) {
  return ordered_json{{"value", e.value}, {"se", e.se}};
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, int line, const std::string& field) {
  try {
    size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + field + "' is not a number: '" + s + "'",
                      line, field);
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", line_no, "");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("expected 'key = value'", line_no, key);
    for (const auto& k : seen)
      if (k == key)
        throw ConfigError("duplicate key '" + key + "'", line_no, key);
    seen.push_back(key);

    if (key == "model") {
      cfg.model_id = val;
    } else if (key == "beta") {
      cfg.beta = parse_double(val, line_no, key);
    } else if (key == "n_grid") {
      cfg.n_grid.clear();
      for (const auto& item : split(val, ','))
        cfg.n_grid.push_back(
            static_cast<int>(parse_long(item, line_no, key)));
    } else if (key == "replications") {
      cfg.replications = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "test_size") {
      cfg.test_size = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "master_seed") {
      cfg.master_seed = parse_u64(val, line_no, key);
    } else if (key == "use_quadrature_oracle") {
      cfg.use_quadrature_oracle = parse_bool(val, line_no, key);
    } else if (key == "quadrature.nodes_per_dim") {
      cfg.quadrature_nodes_per_dim =
          static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "mcmc.n_chains") {
      cfg.mcmc.n_chains = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "mcmc.burn_in") {
      cfg.mcmc.burn_in = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "mcmc.kept_per_chain") {
      cfg.mcmc.kept_per_chain = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "mcmc.thin") {
      cfg.mcmc.thin = static_cast<int>(parse_long(val, line_no, key));
    } else if (key == "mcmc.init_jitter") {
      cfg.mcmc.init_jitter = parse_double(val, line_no, key);
    } else if (key == "mcmc.target_accept") {
      cfg.mcmc.target_accept = parse_double(val, line_no, key);
    } else {
      throw ConfigError("unknown key '" + key + "'", line_no, key);
    }
  }
  cfg.mcmc.beta = cfg.beta;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "model = " << cfg.model_id << "\n";
  os << "beta = " << fmt17(cfg.beta) << "\n";
  os << "n_grid = ";
  for (size_t i = 0; i < cfg.n_grid.size(); ++i)
    os << (i ? "," : "") << cfg.n_grid[i];
  os << "\n";
  os << "replications = " << cfg.replications << "\n";
  os << "test_size = " << cfg.test_size << "\n";
  os << "master_seed = " << cfg.master_seed << "\n";
  os << "use_quadrature_oracle = "
     << (cfg.use_quadrature_oracle ? "true" : "false") << "\n";
  os << "quadrature.nodes_per_dim = " << cfg.quadrature_nodes_per_dim << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "mcmc.n_chains = " << cfg.mcmc.n_chains << "\n";
  os << "mcmc.burn_in = " << cfg.mcmc.burn_in << "\n";
  os << "mcmc.kept_per_chain = " << cfg.mcmc.kept_per_chain << "\n";
  os << "mcmc.thin = " << cfg.mcmc.thin << "\n";
  os << "mcmc.init_jitter = " << fmt17(cfg.mcmc.init_jitter) << "\n";
  os << "mcmc.target_accept = " << fmt17(cfg.mcmc.target_accept) << "\n";
  return os.str();
}

void write_observables_csv(const std::filesystem::path& path,
                           const std::string& model_id, double beta,
                           const std::vector<ReplicationRow>& rows) {
  auto f = open_out(path);
  f << "model,beta,n,replication,Bg,Bt,Gg,Gt,Yg,Yt,Vt,waic,ess_min,"
       "accept_rate\n";
  for (const auto& r : rows) {
    f << model_id << ',' << fmt17(beta) << ',' << r.n << ',' << r.rep << ','
      << fmt17(r.obs.bg) << ',' << fmt17(r.obs.bt) << ',' << fmt17(r.obs.gg)
      << ',' << fmt17(r.obs.gt) << ',' << fmt17(r.obs.yg) << ','
      << fmt17(r.obs.yt) << ',' << fmt17(r.obs.vt()) << ','
      << fmt17(r.obs.waic) << ',' << fmt17(r.ess_min) << ','
      << fmt17(r.accept_rate) << '\n';
  }
}

namespace {
constexpr const char* kAggHeader =
    "model,beta,n,replications,"
    "mean_bg,se_bg,mean_bt,se_bt,mean_gg,se_gg,mean_gt,se_gt,"
    "mean_yg,se_yg,mean_yt,se_yt,mean_vt,se_vt,mean_waic,se_waic,"
    "mean_gg_plus_gt,se_gg_plus_gt,mean_state1,se_state1,mean_state2,"
    "se_state2";
}

void write_aggregate_csv(const std::filesystem::path& path,
                         const AggregateTable& table) {
  auto f = open_out(path);
  f << kAggHeader << '\n';
  for (const auto& r : table.rows) {
    f << table.model_id << ',' << fmt17(table.beta) << ',' << r.n << ','
      << r.reps;
    for (const AggregateStat* s :
         {&r.bg, &r.bt, &r.gg, &r.gt, &r.yg, &r.yt, &r.vt, &r.waic,
          &r.gg_plus_gt, &r.state1, &r.state2})
      f << ',' << fmt17(s->mean) << ',' << fmt17(s->se);
    f << '\n';
  }
}

AggregateTable read_aggregate_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ConfigError("cannot read aggregate csv '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line) || trim(line) != kAggHeader)
    throw ConfigError("unexpected header in '" + path.string() + "'");
  AggregateTable t;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 26)
      throw ConfigError("bad column count in aggregate csv", line_no, "");
    if (t.rows.empty()) {
      t.model_id = cells[0];
      t.beta = parse_double(cells[1], line_no, "beta");
    } else if (t.model_id != cells[0]) {
      throw ConfigError("mixed model ids in aggregate csv", line_no, "model");
    }
    AggregateRow r;
    r.n = static_cast<int>(parse_long(cells[2], line_no, "n"));
    r.reps = static_cast<int>(parse_long(cells[3], line_no, "replications"));
    AggregateStat* stats[] = {&r.bg, &r.bt, &r.gg, &r.gt, &r.yg, &r.yt,
                              &r.vt, &r.waic, &r.gg_plus_gt, &r.state1,
                              &r.state2};
    for (int k = 0; k < 11; ++k) {
      stats[k]->mean = parse_double(cells[4 + 2 * k], line_no, "mean");
      stats[k]->se = parse_double(cells[5 + 2 * k], line_no, "se");
    }
    t.rows.push_back(r);
  }
  if (t.rows.empty())
    throw ConfigError("aggregate csv '" + path.string() + "' has no rows");
  return t;
}

void write_fits_json(const std::filesystem::path& path, const Model& model,
                     const AggregateTable& table, const FitResult& fit,
                     const std::vector<CheckResult>& checks) {
  const TheoryCard& card = model.theory();
  ordered_json j;
  j["model"] = model.id();
  j["beta"] = table.beta;
  j["artifact_version"] = kVersion;
  ordered_json tc;
  tc["lambda"] = card.lambda;
  tc["nu"] = card.nu ? ordered_json(*card.nu) : ordered_json(nullptr);
  tc["multiplicity"] = card.multiplicity;
  tc["l0"] = card.l0;
  tc["kappa"] = card.kappa;
  tc["q_constant"] =
      card.q_constant ? ordered_json(*card.q_constant) : ordered_json(nullptr);
  tc["derivation_note"] = card.derivation_note;
  j["theory_card"] = tc;
  ordered_json jf;
  jf["kappa"] = estimate_json(fit.kappa);
  jf["lambda"] = estimate_json(fit.lambda);
  jf["nu"] = estimate_json(fit.nu);
  jf["vt_slope"] = estimate_json(fit.vt_slope);
  jf["note"] = fit.note;
  ordered_json res = ordered_json::array();
  for (size_t i = 0; i < fit.state.n.size(); ++i) {
    ordered_json r;
    r["n"] = fit.state.n[i];
    r["r1"] = estimate_json(fit.state.r1[i]);
    r["r2"] = estimate_json(fit.state.r2[i]);
    res.push_back(r);
  }
  jf["state_eq_residuals"] = res;
  j["fit"] = jf;
  ordered_json jc = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["se"] = c.se;
    e["target"] = std::isnan(c.target) ? ordered_json(nullptr)
                                       : ordered_json(c.target);
    e["criterion"] = c.criterion;
    e["asserted"] = c.asserted;
    e["pass"] = c.pass;
    jc.push_back(e);
  }
  j["checks"] = jc;
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_manifest_json(const std::filesystem::path& path,
                         const ExperimentConfig& cfg,
                         const ManifestTimes& times) {
  ordered_json j;
  j["artifact"] = "sltlab";
  j["version"] = kVersion;
  j["started"] = times.started;
  j["finished"] = times.finished;
  j["master_seed"] = cfg.master_seed;
  j["config"] = canonical_config_text(cfg);
  ordered_json seeds = ordered_json::array();
  for (int n : cfg.n_grid) {
    for (int rep = 0; rep < cfg.replications; ++rep) {
      ordered_json s;
      s["n"] = n;
      s["rep"] = rep;
      s["dataset"] = derive_seed(cfg.master_seed, n, rep, StreamKind::dataset);
      s["test_set"] = derive_seed(cfg.master_seed, n, rep, StreamKind::test_set);
      s["mcmc"] = derive_seed(cfg.master_seed, n, rep, StreamKind::mcmc);
      seeds.push_back(s);
    }
  }
  j["seeds"] = seeds;
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_plotdata_csv(const std::filesystem::path& path,
                        const AggregateTable& table, const Model& model) {
  auto f = open_out(path);
  f << "series,n,value,se,theory_value\n";
  struct Row {
    const char* name;
    ObservableId id;
  } series[] = {{"Bg", ObservableId::Bg}, {"Bt", ObservableId::Bt},
                {"Gg", ObservableId::Gg}, {"Gt", ObservableId::Gt},
                {"Yg", ObservableId::Yg}, {"Yt", ObservableId::Yt}};
  for (const auto& s : series) {
    for (const auto& r : table.rows) {
      const PredictedObservables p =
          theory_predict(model.theory(), table.beta, r.n);
      const std::optional<double> tv =
          s.id == ObservableId::Bg   ? p.bg
          : s.id == ObservableId::Bt ? p.bt
          : s.id == ObservableId::Gg ? p.gg
          : s.id == ObservableId::Gt ? p.gt
          : s.id == ObservableId::Yg ? p.yg
                                     : p.yt;
      const AggregateStat& st =
          s.id == ObservableId::Bg   ? r.bg
          : s.id == ObservableId::Bt ? r.bt
          : s.id == ObservableId::Gg ? r.gg
          : s.id == ObservableId::Gt ? r.gt
          : s.id == ObservableId::Yg ? r.yg
                                     : r.yt;
      f << s.name << ',' << r.n << ',' << fmt17(st.mean) << ','
        << fmt17(st.se) << ',' << (tv ? fmt17(*tv) : "") << '\n';
    }
  }
}

std::string iso_timestamp_utc() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace slt
