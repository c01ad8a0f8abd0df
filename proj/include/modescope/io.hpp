#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modescope/dmd.hpp"
#include "modescope/experiment.hpp"
#include "modescope/signal.hpp"

namespace modescope {

/// Shortest round-trip decimal form; identical inputs give identical bytes.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline nlohmann::json real_part_rows(const CMat<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json imag_part_rows(const CMat<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).imag());
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMat<double> complex_from_rows(const nlohmann::json& re, const nlohmann::json& im) {
  const Index rows = static_cast<Index>(re.size());
  require(rows > 0 && im.size() == re.size(), "json: re/im row counts differ");
  const Index cols = static_cast<Index>(re.at(0).size());
  CMat<double> out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& rrow = re.at(static_cast<size_t>(i));
    const auto& irow = im.at(static_cast<size_t>(i));
    require(static_cast<Index>(rrow.size()) == cols &&
                static_cast<Index>(irow.size()) == cols,
            "json: ragged re/im rows");
    for (Index j = 0; j < cols; ++j)
      out(i, j) = {rrow.at(static_cast<size_t>(j)).get<double>(),
                   irow.at(static_cast<size_t>(j)).get<double>()};
  }
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const SignalSpec<double>& spec) {
  nlohmann::json j;
  j["m"] = spec.m;
  j["D"] = spec.D;
  j["N"] = spec.N;
  j["rho"] = std::vector<double>(spec.rho.data(), spec.rho.data() + spec.rho.size());
  j["theta"] =
      std::vector<double>(spec.theta.data(), spec.theta.data() + spec.theta.size());
  j["modes_re"] = detail::real_part_rows(spec.modes);
  j["modes_im"] = detail::imag_part_rows(spec.modes);
  nlohmann::json amp_re = nlohmann::json::array();
  nlohmann::json amp_im = nlohmann::json::array();
  for (Index i = 0; i < spec.amplitudes.size(); ++i) {
    amp_re.push_back(spec.amplitudes(i).real());
    amp_im.push_back(spec.amplitudes(i).imag());
  }
  j["amp_re"] = std::move(amp_re);
  j["amp_im"] = std::move(amp_im);
  return j;
}

inline SignalSpec<double> signal_spec_from_json(const nlohmann::json& j) {
  SignalSpec<double> spec;
  spec.m = j.at("m").get<Index>();
  spec.D = j.at("D").get<Index>();
  spec.N = j.at("N").get<Index>();
  const auto rho = j.at("rho").get<std::vector<double>>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  spec.rho = Eigen::Map<const RVec<double>>(rho.data(), static_cast<Index>(rho.size()));
  spec.theta =
      Eigen::Map<const RVec<double>>(theta.data(), static_cast<Index>(theta.size()));
  spec.modes = detail::complex_from_rows(j.at("modes_re"), j.at("modes_im"));
  const auto amp_re = j.at("amp_re").get<std::vector<double>>();
  const auto amp_im = j.at("amp_im").get<std::vector<double>>();
  require(amp_re.size() == amp_im.size(), "json: amp_re/amp_im lengths differ");
  spec.amplitudes.resize(static_cast<Index>(amp_re.size()));
  for (size_t i = 0; i < amp_re.size(); ++i)
    spec.amplitudes(static_cast<Index>(i)) = {amp_re[i], amp_im[i]};
  spec.validate();
  return spec;
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["m"] = cfg.m;
  j["D"] = cfg.D;
  j["N"] = cfg.N;
  j["rho"] = cfg.rho;
  j["delta_theta"] = cfg.delta_theta;
  j["kappa_b"] = cfg.kappa_b;
  j["L"] = cfg.L;
  j["M"] = cfg.M;
  if (std::isfinite(cfg.snr_db))
    j["snr_db"] = cfg.snr_db;
  else
    j["snr_db"] = "inf";
  std::vector<std::string> methods;
  for (const Method m : cfg.methods) methods.emplace_back(method_name(m));
  j["methods"] = std::move(methods);
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  return j;
}

/// Loads a config, starting from the defaults; only present fields override.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("m")) cfg.m = j.at("m").get<Index>();
  if (j.contains("D")) cfg.D = j.at("D").get<Index>();
  if (j.contains("N")) cfg.N = j.at("N").get<Index>();
  if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
  if (j.contains("delta_theta")) cfg.delta_theta = j.at("delta_theta").get<double>();
  if (j.contains("kappa_b")) cfg.kappa_b = j.at("kappa_b").get<double>();
  if (j.contains("L")) cfg.L = j.at("L").get<Index>();
  if (j.contains("M")) cfg.M = j.at("M").get<Index>();
  if (j.contains("snr_db")) {
    const auto& v = j.at("snr_db");
    if (v.is_string())
      cfg.snr_db = std::numeric_limits<double>::infinity();
    else
      cfg.snr_db = v.get<double>();
  }
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& name : j.at("methods"))
      cfg.methods.push_back(parse_method(name.get<std::string>()));
  }
  if (j.contains("trials")) cfg.trials = j.at("trials").get<Index>();
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  return cfg;
}

inline nlohmann::json to_json(const DmdDecomposition<double>& dec) {
  nlohmann::json j;
  j["D"] = dec.D;
  j["L"] = dec.L;
  j["M"] = dec.M;
  nlohmann::json eig_re = nlohmann::json::array();
  nlohmann::json eig_im = nlohmann::json::array();
  nlohmann::json amp_re = nlohmann::json::array();
  nlohmann::json amp_im = nlohmann::json::array();
  for (Index i = 0; i < dec.M; ++i) {
    eig_re.push_back(dec.eigenvalues(i).real());
    eig_im.push_back(dec.eigenvalues(i).imag());
    amp_re.push_back(dec.amplitudes(i).real());
    amp_im.push_back(dec.amplitudes(i).imag());
  }
  j["eigenvalues_re"] = std::move(eig_re);
  j["eigenvalues_im"] = std::move(eig_im);
  j["amplitudes_re"] = std::move(amp_re);
  j["amplitudes_im"] = std::move(amp_im);
  j["sigma"] = std::vector<double>(dec.svd.sigma.data(),
                                   dec.svd.sigma.data() + dec.svd.sigma.size());
  j["projected_modes_re"] = detail::real_part_rows(dec.projected_modes);
  j["projected_modes_im"] = detail::imag_part_rows(dec.projected_modes);
  j["exact_modes_re"] = detail::real_part_rows(dec.exact_modes);
  j["exact_modes_im"] = detail::imag_part_rows(dec.exact_modes);
  j["amplitudes_rank_deficient"] = dec.amplitudes_rank_deficient;
  j["wide_regime"] = dec.wide_regime;
  return j;
}

inline std::string eigenvalue_table_csv(const DmdDecomposition<double>& dec) {
  std::string out = "index,re,im,modulus,phase\n";
  for (Index i = 0; i < dec.M; ++i) {
    const Complex<double> lam = dec.eigenvalues(i);
    out += std::to_string(i) + "," + format_double(lam.real()) + "," +
           format_double(lam.imag()) + "," + format_double(std::abs(lam)) + "," +
           format_double(std::arg(lam)) + "\n";
  }
  return out;
}

inline std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "param_value,method,hits,trials,hit_prob,failures\n";
  for (size_t g = 0; g < sweep.points.size(); ++g) {
    const SweepPoint& pt = sweep.points[g];
    for (size_t mi = 0; mi < sweep.methods.size(); ++mi) {
      out += format_double(pt.param_value);
      out += ",";
      out += method_name(sweep.methods[mi]);
      out += ",";
      out += std::to_string(pt.hits[mi]);
      out += ",";
      out += std::to_string(pt.effective());
      out += ",";
      out += format_double(pt.hit_prob(mi));
      out += ",";
      out += std::to_string(pt.failures);
      out += "\n";
    }
  }
  return out;
}

/// Inverse of sweep_csv, sufficient to recompute AUCs from a saved sweep.
inline SweepResult read_sweep_csv(std::istream& in) {
  SweepResult sweep;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "sweep csv: empty stream");
  require(line == "param_value,method,hits,trials,hit_prob,failures",
          "sweep csv: unexpected header");
  std::map<double, size_t> point_index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    require(fields.size() == 6, "sweep csv: malformed row");
    const double param = std::stod(fields[0]);
    const Method method = parse_method(fields[1]);
    const Index hits = static_cast<Index>(std::stoll(fields[2]));
    const Index eff = static_cast<Index>(std::stoll(fields[3]));
    const Index failures = static_cast<Index>(std::stoll(fields[5]));
    if (point_index.find(param) == point_index.end()) {
      point_index[param] = sweep.points.size();
      SweepPoint pt;
      pt.param_value = param;
      pt.attempted = eff + failures;
      pt.failures = failures;
      sweep.points.push_back(std::move(pt));
    }
    SweepPoint& pt = sweep.points[point_index[param]];
    size_t mi = 0;
    for (; mi < sweep.methods.size(); ++mi)
      if (sweep.methods[mi] == method) break;
    if (mi == sweep.methods.size()) sweep.methods.push_back(method);
    if (pt.hits.size() <= mi) pt.hits.resize(mi + 1, 0);
    pt.hits[mi] = hits;
  }
  require(!sweep.points.empty(), "sweep csv: no data rows");
  std::sort(sweep.points.begin(), sweep.points.end(),
            [](const SweepPoint& a, const SweepPoint& b) {
              return a.param_value < b.param_value;
            });
  for (SweepPoint& pt : sweep.points) {
    pt.hits.resize(sweep.methods.size(), 0);
    sweep.grid.push_back(pt.param_value);
  }
  return sweep;
}

inline std::string scores_csv(const SweepResult& sweep) {
  require(!sweep.records.empty(), "scores csv: sweep was run without records");
  std::string out = "trial_id,method,mode_index,score,label,eigval_re,eigval_im\n";
  for (size_t g = 0; g < sweep.records.size(); ++g) {
    const auto& batch = sweep.records[g];
    for (size_t t = 0; t < batch.size(); ++t) {
      const TrialResult& tr = batch[t];
      if (tr.failed) continue;
      const size_t trial_id = g * batch.size() + t;
      for (const MethodOutcome& out_m : tr.outcomes) {
        if (is_order_only(out_m.method)) continue;
        for (size_t k = 0; k < out_m.scores.size(); ++k) {
          out += std::to_string(trial_id);
          out += ",";
          out += method_name(out_m.method);
          out += ",";
          out += std::to_string(k);
          out += ",";
          out += format_double(out_m.scores[k]);
          out += ",";
          out += out_m.labels[k] ? "true" : "spurious";
          out += ",";
          out += format_double(tr.eigenvalues(static_cast<Index>(k)).real());
          out += ",";
          out += format_double(tr.eigenvalues(static_cast<Index>(k)).imag());
          out += "\n";
        }
      }
    }
  }
  return out;
}

inline std::string auc_csv(const std::vector<std::pair<Method, double>>& aucs) {
  std::string out = "method,auc\n";
  for (const auto& [method, auc] : aucs) {
    out += method_name(method);
    out += ",";
    out += format_double(auc);
    out += "\n";
  }
  return out;
}

inline std::string cdf_csv(const SpuriousCdf& cdf) {
  std::string out = "L,magnitude,cdf\n";
  for (size_t li = 0; li < cdf.L_grid.size(); ++li) {
    if (cdf.empty_pool[li]) continue;  // no spurious modes pooled at this L
    for (size_t i = 0; i < cdf.eval_points.size(); ++i) {
      out += std::to_string(cdf.L_grid[li]);
      out += ",";
      out += format_double(cdf.eval_points[i]);
      out += ",";
      out += format_double(cdf.cdf[li][i]);
      out += "\n";
    }
  }
  return out;
}

inline nlohmann::json to_json(const VerifyReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const VerifyCheck& c : report.checks) {
    nlohmann::json j;
    j["name"] = c.name;
    j["max_error"] = c.max_error;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(std::move(j));
  }
  return nlohmann::json{{"checks", std::move(checks)}, {"all_pass", report.all_pass}};
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open for writing: " + path);
  out << content;
  require(static_cast<bool>(out), "write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace modescope
