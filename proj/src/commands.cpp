#include "tidict/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "tidict/errors.hpp"
#include "tidict/gram_decompose.hpp"
#include "tidict/lowrank_dictionary.hpp"
#include "tidict/taylor.hpp"

namespace tidict::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

ojson box_json(const ParamBox& b) {
  ojson j;
  j["lower"] = to_std(b.lower());
  j["upper"] = to_std(b.upper());
  return j;
}

void emit(const Output& io, const std::string& filename, const std::string& content) {
  if (!io.dir) {
    io.out << content;
    return;
  }
  std::filesystem::create_directories(*io.dir);
  std::ofstream f(*io.dir / filename, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("", "cannot write " + (*io.dir / filename).string());
  f << content;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

int guarded(const Output& io, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    io.err << "error: config " << e.what() << "\n";
    return kConfigError;
  } catch (const NoValidDecomposition& e) {
    io.err << "error: no valid decomposition: " << e.what() << "\n";
    return kNoDecomposition;
  } catch (const IllConditionedError& e) {
    io.err << "error: ill-conditioned Gram matrix: " << e.what() << "\n";
    return kNoDecomposition;
  } catch (const DomainError& e) {
    io.err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const TruncationError& e) {
    io.err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

/// Inclusive uniform grid over a box, row-major with axis 0 slowest.
std::vector<Vector> sweep_points(const ParamBox& region, const std::vector<std::size_t>& resolution) {
  const std::size_t d = region.dim();
  std::size_t total = 1;
  for (auto r : resolution) total *= r;
  std::vector<Vector> out;
  out.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    Vector theta(static_cast<Eigen::Index>(d));
    for (std::size_t i = d; i-- > 0;) {
      const std::size_t m = rest % resolution[i];
      rest /= resolution[i];
      const auto ii = static_cast<Eigen::Index>(i);
      const double lo = region.lower()[ii];
      const double hi = region.upper()[ii];
      theta[ii] = (m + 1 == resolution[i]) ? hi : lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(resolution[i] - 1);
    }
    out.push_back(std::move(theta));
  }
  return out;
}

std::string csv_header(std::size_t dim, const std::vector<std::string>& value_columns) {
  std::string h;
  for (std::size_t i = 0; i < dim; ++i) h += "theta_" + std::to_string(i + 1) + ",";
  for (std::size_t c = 0; c < value_columns.size(); ++c) h += value_columns[c] + (c + 1 < value_columns.size() ? "," : "");
  return h + "\n";
}

void csv_row(std::string& out, const Vector& theta, const std::vector<double>& values) {
  for (Eigen::Index i = 0; i < theta.size(); ++i) out += format_double(theta[i]) + ",";
  for (std::size_t c = 0; c < values.size(); ++c) out += format_double(values[c]) + (c + 1 < values.size() ? "," : "");
  out += "\n";
}

ParamBox hull(const ParamBox& a, const ParamBox& b) {
  return {a.lower().cwiseMin(b.lower()), a.upper().cwiseMax(b.upper())};
}

ParamBox hull(const ParamBox& a, const Vector& p) {
  return {a.lower().cwiseMin(p), a.upper().cwiseMax(p)};
}

LowRankDictionary build_dictionary(const ExperimentConfig& cfg) {
  return LowRankDictionary::build(cfg.make_kernel(), cfg.grid(), cfg.domain(), cfg.tolerances.decomposition);
}

Vector uniform_in(const ParamBox& box, std::mt19937_64& rng) {
  Vector theta(static_cast<Eigen::Index>(box.dim()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    std::uniform_real_distribution<double> u(box.lower()[i], box.upper()[i]);
    theta[i] = u(rng);
  }
  return theta;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_decompose(const ExperimentConfig& cfg, const Output& io) {
  return guarded(io, [&] {
    const auto kernel = cfg.make_kernel();
    const NodeGrid grid = cfg.grid();
    const GramSystem gram = build_gram(*kernel, grid);
    const RaisedCosineKernel rc = decompose_gram(*kernel, grid, cfg.tolerances.decomposition);
    const ResidualReport check = verify_decomposition(gram, rc);
    if (!(check.residual <= cfg.tolerances.decomposition.residual)) {
      throw NoValidDecomposition("verification residual " + format_double(check.residual) + " exceeds tolerance");
    }

    ojson report;
    report["residual"] = check.residual;
    report["condition_number"] = gram.condition_number();
    report["psd_margin"] = check.psd_margin;
    if (io.dir) {
      emit(io, "decomposition.json", dump(rc.to_json()));
      emit(io, "report.json", dump(report));
    } else {
      ojson all;
      all["decomposition"] = rc.to_json();
      all["report"] = report;
      emit(io, "", dump(all));
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_errormap(const ExperimentConfig& cfg, const Output& io) {
  return guarded(io, [&] {
    const LowRankDictionary ld = build_dictionary(cfg);
    const auto points = sweep_points(cfg.evaluation_region(), cfg.evaluation.resolution);
    std::string csv = csv_header(cfg.dim, {"error_proposed"});
    for (const auto& theta : points) csv_row(csv, theta, {ld.approx_error(theta)});
    emit(io, "errormap.csv", csv);
    return static_cast<int>(kSuccess);
  });
}

int cmd_compare_taylor(const ExperimentConfig& cfg, const Output& io) {
  return guarded(io, [&] {
    const std::size_t proposed_rank = cfg.grid().size();
    const std::size_t taylor_rank = multi_indices(cfg.dim, cfg.taylor.order).size();
    if (proposed_rank != taylor_rank) {
      throw ConfigError("/taylor/order", "rank mismatch: proposed L = " + std::to_string(proposed_rank) +
                                             ", Taylor L = " + std::to_string(taylor_rank));
    }
    const LowRankDictionary ld = build_dictionary(cfg);
    const ParamBox region = cfg.evaluation_region();
    const Vector center = cfg.taylor.center ? *cfg.taylor.center : region.centroid();
    const ParamBox span = hull(hull(cfg.domain(), region), center);
    const DiscreteEmbedding embed(*cfg.make_kernel(), span, cfg.embedding.samples_per_axis, cfg.embedding.margin_sigmas);
    const TaylorApproximation ta(embed, center, cfg.taylor.order);

    const auto points = sweep_points(region, cfg.evaluation.resolution);
    std::string csv = csv_header(cfg.dim, {"error_proposed", "error_taylor"});
    double max_p = 0.0, max_t = 0.0, sum_p = 0.0, sum_t = 0.0;
    for (const auto& theta : points) {
      const double ep = ld.approx_error(theta);
      const double et = taylor_error(ta, embed, theta);
      max_p = std::max(max_p, ep);
      max_t = std::max(max_t, et);
      sum_p += ep;
      sum_t += et;
      csv_row(csv, theta, {ep, et});
    }
    const double n = static_cast<double>(points.size());

    ojson summary;
    summary["rank"] = proposed_rank;
    summary["taylor_order"] = cfg.taylor.order;
    summary["taylor_center"] = to_std(center);
    summary["region"] = box_json(region);
    summary["resolution"] = cfg.evaluation.resolution;
    summary["proposed"] = {{"max", max_p}, {"mean", sum_p / n}};
    summary["taylor"] = {{"max", max_t}, {"mean", sum_t / n}};
    summary["margin_max"] = max_t - max_p;
    summary["margin_mean"] = (sum_t - sum_p) / n;
    summary["proposed_better_max"] = max_p < max_t;
    summary["proposed_better_mean"] = sum_p < sum_t;

    if (io.dir) {
      emit(io, "compare_taylor.csv", csv);
      emit(io, "compare_taylor_summary.json", dump(summary));
    } else {
      emit(io, "", dump(summary));
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_select_atom(const ExperimentConfig& cfg, const Output& io) {
  return guarded(io, [&] {
    if (!cfg.select_atom.theta_true) throw ConfigError("/select_atom/theta_true", "missing required key");
    const Vector& target = *cfg.select_atom.theta_true;
    const LowRankDictionary ld = build_dictionary(cfg);
    const ParamBox search = cfg.select_atom.search ? *cfg.select_atom.search : ld.box();
    if (!ld.box().contains(target, 1e-12)) throw ConfigError("/select_atom/theta_true", "outside the parameter box");

    const DiscreteEmbedding embed(*cfg.make_kernel(), ld.box(), cfg.embedding.samples_per_axis,
                                  cfg.embedding.margin_sigmas);

    // r = a_N(theta*) + white noise with E|noise| = noise_level.
    Vector residual = embed.discretize_atom(target);
    if (cfg.select_atom.noise_level > 0.0) {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> normal(0.0, cfg.select_atom.noise_level /
                                                       std::sqrt(static_cast<double>(residual.size())));
      for (Eigen::Index i = 0; i < residual.size(); ++i) residual[i] += normal(rng);
    }

    // <v_l, r> = sum_j G^-1(l, j) <a(theta_j), r>.
    Vector node_corr(static_cast<Eigen::Index>(ld.rank()));
    for (std::size_t j = 0; j < ld.rank(); ++j) {
      node_corr[static_cast<Eigen::Index>(j)] = embed.discretize_atom(ld.gram().nodes()[j]).dot(residual);
    }
    const Vector projections = ld.gram().solve(node_corr);
    const AtomSelection chosen = ld.select_atom(projections, search, cfg.select_atom.settings);

    // Exhaustive oracle on the true correlation <a_N(theta), r>.
    const std::size_t m = cfg.select_atom.oracle_points;
    std::vector<Matrix> axis_atoms;
    std::vector<Vector> axis_coords;
    Vector cell(static_cast<Eigen::Index>(cfg.dim));
    for (std::size_t i = 0; i < cfg.dim; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double lo = search.lower()[ii];
      const double hi = search.upper()[ii];
      Vector coords(static_cast<Eigen::Index>(m));
      for (std::size_t k = 0; k < m; ++k) {
        coords[static_cast<Eigen::Index>(k)] =
            (k + 1 == m) ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
      }
      cell[ii] = (hi - lo) / static_cast<double>(m - 1);
      axis_atoms.push_back(embed.axis_atoms(i, coords));
      axis_coords.push_back(std::move(coords));
    }
    const Vector corr = embed.separable_inner_products(axis_atoms, residual);
    Eigen::Index best = 0;
    for (Eigen::Index f = 1; f < corr.size(); ++f) {
      if (corr[f] > corr[best]) best = f;
    }
    Vector oracle(static_cast<Eigen::Index>(cfg.dim));
    {
      auto rest = static_cast<std::size_t>(best);
      for (std::size_t i = cfg.dim; i-- > 0;) {
        oracle[static_cast<Eigen::Index>(i)] = axis_coords[i][static_cast<Eigen::Index>(rest % m)];
        rest /= m;
      }
    }

    ojson j;
    j["theta_star"] = to_std(chosen.theta);
    j["objective"] = chosen.objective;
    j["oracle_theta"] = to_std(oracle);
    j["oracle_objective"] = corr[best];
    j["distance"] = (chosen.theta - oracle).norm();
    j["oracle_cell_diagonal"] = cell.norm();
    j["theta_true"] = to_std(target);
    j["noise_level"] = cfg.select_atom.noise_level;
    j["seed"] = cfg.seed;
    emit(io, "select_atom.json", dump(j));
    return static_cast<int>(kSuccess);
  });
}

int cmd_validate(const ExperimentConfig& cfg, const Output& io) {
  return guarded(io, [&] {
    const auto kernel = cfg.make_kernel();
    const NodeGrid grid = cfg.grid();
    GramSystem gram = build_gram(*kernel, grid);
    std::optional<RaisedCosineKernel> rc;
    if (cfg.validate.rc_file) {
      std::ifstream in(*cfg.validate.rc_file);
      if (!in) throw ConfigError("/validate/rc_file", "cannot open " + cfg.validate.rc_file->string());
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("/validate/rc_file", std::string("malformed JSON: ") + e.what());
      }
      try {
        rc = RaisedCosineKernel::from_json(j);
      } catch (const ConfigError& e) {
        throw ConfigError("/validate/rc_file" + e.path(), e.what());
      }
      if (rc->dim() != cfg.dim) throw ConfigError("/validate/rc_file", "kernel dimension differs from config dim");
    } else {
      rc = decompose_gram(*kernel, grid, cfg.tolerances.decomposition);
    }
    const LowRankDictionary ld = LowRankDictionary::unverified(kernel, std::move(gram), *rc, cfg.domain());
    const auto& tol = cfg.tolerances;
    const ValidationReport structure = ld.rc().validate();

    ojson props = ojson::array();
    bool all_pass = true;
    auto record = [&](const std::string& name, bool pass, double value, double threshold, const std::string& detail) {
      ojson p;
      p["name"] = name;
      p["passed"] = pass;
      p["value"] = value;
      p["threshold"] = threshold;
      p["detail"] = detail;
      props.push_back(std::move(p));
      all_pass = all_pass && pass;
    };
    auto issues_of = [&](const std::string& check) {
      std::string s;
      for (const auto& issue : structure.issues) {
        if (issue.check == check) s += (s.empty() ? "" : "; ") + issue.message;
      }
      return s;
    };

    record("decomposition_residual", ld.residual().residual <= tol.decomposition.residual, ld.residual().residual,
           tol.decomposition.residual, "max |G - rc| over node pairs");

    const std::size_t L = ld.rank();
    record("rank_consistency", !structure.failed("rank"), static_cast<double>(ld.rc().num_terms()),
           static_cast<double>(L / 2), issues_of("rank").empty() ? "K = floor(L/2)" : issues_of("rank"));
    record("parity", !structure.failed("parity"), ld.rc().lambda0(), 0.0,
           issues_of("parity").empty() ? (L % 2 ? "L odd, lambda0 > 0" : "L even, lambda0 = 0") : issues_of("parity"));
    record("frequencies", !structure.failed("frequencies"), static_cast<double>(ld.rc().num_terms()), 0.0,
           issues_of("frequencies").empty() ? "distinct up to sign" : issues_of("frequencies"));
    const bool psd = !structure.failed("psd") && ld.residual().psd_margin >= -tol.psd;
    record("psd", psd, ld.residual().psd_margin, -tol.psd,
           issues_of("psd").empty() ? "smallest eigenvalue of rc on the nodes" : issues_of("psd"));

    double interp = 0.0;
    for (const auto& node : ld.gram().nodes()) interp = std::max(interp, ld.approx_error(node));
    record("interpolation", interp <= tol.interpolation, interp, tol.interpolation, "max approx_error at nodes");

    std::mt19937_64 rng(cfg.seed);
    const ParamBox& box = ld.box();
    double kernel_gap = 0.0, shift_gap = 0.0, norm_gap = 0.0;
    for (std::size_t s = 0; s < cfg.validate.random_samples; ++s) {
      const Vector a = uniform_in(box, rng);
      const Vector b = uniform_in(box, rng);
      const Vector tau = 2.0 * (uniform_in(box, rng) - box.centroid());
      const double inner = ld.approx_inner(a, b);
      kernel_gap = std::max(kernel_gap, std::abs(inner - ld.rc().eval(a - b)));
      shift_gap = std::max(shift_gap, std::abs(ld.approx_inner(a + tau, b + tau) - inner));
      norm_gap = std::max(norm_gap, std::abs(ld.approx_inner(a, a) - 1.0));
    }
    record("kernel_equality", kernel_gap <= tol.kernel_equality, kernel_gap, tol.kernel_equality,
           "max |approx_inner - rc_eval| over random pairs");
    record("translation_shift", shift_gap <= tol.translation_shift, shift_gap, tol.translation_shift,
           "max |approx_inner(t+tau, t'+tau) - approx_inner(t, t')|");
    record("unit_norm", norm_gap <= tol.unit_norm, norm_gap, tol.unit_norm, "max |approx_inner(t, t) - 1|");

    const auto n = static_cast<Eigen::Index>(2 * L);
    std::vector<Vector> params;
    for (Eigen::Index i = 0; i < n; ++i) params.push_back(uniform_in(box, rng));
    Matrix inner(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) inner(i, k) = ld.approx_inner(params[i], params[k]);
    }
    const Vector sv = Eigen::JacobiSVD<Matrix>(inner).singularValues();
    const double tail = sv.size() > static_cast<Eigen::Index>(L) ? sv[static_cast<Eigen::Index>(L)] : 0.0;
    record("rank_bound", tail <= tol.rank, tail, tol.rank, "singular value L+1 of approx_inner over 2L parameters");

    ojson result;
    result["rank"] = L;
    result["lambda0"] = ld.rc().lambda0();
    result["properties"] = std::move(props);
    result["passed"] = all_pass;
    emit(io, "validate.json", dump(result));
    if (!all_pass) io.err << "validation failed\n";
    return static_cast<int>(all_pass ? kSuccess : kValidationFailed);
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Translation-invariant interpolating low-rank dictionaries", "tidict"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"decompose", "raised-cosine decomposition of the Gram matrix"},
      {"errormap", "approximation error over the evaluation grid (CSV)"},
      {"compare-taylor", "proposed vs Taylor approximation error (CSV + summary)"},
      {"select-atom", "surrogate atom selection vs exhaustive oracle"},
      {"validate", "run the invariant suite"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--out", out_dir, "output directory");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  const Output io{out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir), out, err};
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::load(config_path);
  } catch (const ConfigError& e) {
    err << "error: config " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: config " << e.what() << "\n";
    return kConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "decompose") return cmd_decompose(cfg, io);
  if (name == "errormap") return cmd_errormap(cfg, io);
  if (name == "compare-taylor") return cmd_compare_taylor(cfg, io);
  if (name == "select-atom") return cmd_select_atom(cfg, io);
  return cmd_validate(cfg, io);
}

}  // namespace tidict::cli
