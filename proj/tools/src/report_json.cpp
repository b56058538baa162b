#include "homsum/cli/report_json.hpp"

#include <algorithm>
#include <cmath>

#include "homsum/contraction.hpp"
#include "homsum/moments.hpp"

namespace homsum::cli {

namespace {

void put(Json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

Json matrix(const std::vector<std::vector<double>>& m) {
  Json out = Json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

std::vector<std::vector<double>> matrix_from(const Json& j) {
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(row.get<std::vector<double>>());
  return out;
}

Json quantile_column(const std::vector<double>& sorted) {
  Json out = Json::array();
  if (sorted.empty()) return out;
  for (double p : {0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999}) {
    const auto n = static_cast<double>(sorted.size());
    const auto k = static_cast<std::size_t>(std::min(n - 1.0, std::floor(p * n)));
    out.push_back({{"p", p}, {"q", sorted[k]}});
  }
  return out;
}

}  // namespace

Json to_json(const MomentEstimate& m) {
  Json j;
  j["value"] = m.value;
  j["std_error"] = m.std_error;
  j["source"] = std::string(to_string(m.source));
  j["method"] = m.method;
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["order"] = r.order;
  if (r.nu) j["nu"] = *r.nu;
  Json stats = Json::object();
  put(stats, "t1", r.t1);
  if (r.t1_exactness) stats["t1_exactness"] = std::string(to_string(*r.t1_exactness));
  put(stats, "t2", r.t2);
  put(stats, "t3", r.t3);
  if (r.t3_exactness) stats["t3_exactness"] = std::string(to_string(*r.t3_exactness));
  put(stats, "t4", r.t4);
  if (!stats.empty()) j["statistics"] = stats;
  Json c = Json::object();
  put(c, "c_star", r.c_star);
  put(c, "prefactor", r.prefactor);
  put(c, "scale", r.scale);
  put(c, "invariance", r.invariance);
  put(c, "moment_gap_term", r.moment_gap_term);
  put(c, "influence_term", r.influence_term);
  put(c, "b1", r.b1);
  put(c, "b2", r.b2);
  put(c, "b_factor", r.b_factor);
  put(c, "max_influence", r.max_influence);
  put(c, "c_influence_sum", r.c_influence_sum);
  if (!r.delta.empty()) c["delta"] = matrix(r.delta);
  j["components"] = c;
  Json inputs;
  if (r.eq3x) inputs["eq3x"] = to_json(*r.eq3x);
  if (r.eq4x) inputs["eq4x"] = to_json(*r.eq4x);
  if (r.kind == "multivariate") {
    inputs["budget"] = {{"b2", r.multi_budget.b2m}, {"b3", r.multi_budget.b3m}};
  } else if (r.kind == "normal" || r.kind == "chi2") {
    inputs["budget"] = {{"a", r.budget.a}, {"b", r.budget.b}, {"b3", r.budget.b3}};
  }
  inputs["profile"] = {{"beta3", r.profile.beta3}, {"beta4", r.profile.beta4}};
  j["inputs"] = inputs;
  j["applicable"] = r.applicable;
  if (r.total) {
    j["total"] = *r.total;
  } else {
    j["total"] = nullptr;
  }
  return j;
}

std::optional<double> recompute_total(const Json& j) {
  const auto& c = j.at("components");
  const std::string kind = j.at("kind").get<std::string>();
  auto g = [&](const char* key) { return c.at(key).get<double>(); };
  if (kind == "normal") {
    return smooth_total(g("invariance"), g("c_star"), g("scale"), g("moment_gap_term"), g("influence_term"));
  }
  if (kind == "chi2") {
    return smooth_total(g("invariance"), g("prefactor"), g("scale"), g("moment_gap_term"), g("influence_term"));
  }
  if (kind == "wasserstein") {
    const double b2 = wasserstein_b2(g("prefactor"), g("scale"), g("moment_gap_term"), g("influence_term"));
    return wasserstein_total(g("b1"), b2);
  }
  const auto delta = matrix_from(c.at("delta"));
  if (kind == "multivariate") {
    const auto& budget = j.at("inputs").at("budget");
    return multivariate_total(delta, budget.at("b2").get<double>(), budget.at("b3").get<double>(),
                              g("c_influence_sum"), g("prefactor"), g("max_influence"));
  }
  if (kind == "convex") {
    return convex_total(convex_b1(delta), convex_b2(g("c_influence_sum"), g("prefactor"), g("max_influence")),
                        g("b_factor"), delta.size());
  }
  return std::nullopt;
}

Json to_json(const VerdictReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["target"] = std::string(to_string(r.target));
  if (r.nu) j["nu"] = *r.nu;
  j["tolerance"] = r.tolerance;
  j["terminal_threshold"] = r.terminal_threshold;
  Json points = Json::array();
  for (const auto& p : r.points) {
    Json q;
    q["size"] = p.size;
    q["order"] = p.order;
    q["dimension"] = p.dimension;
    put(q, "fourth_moment", p.fourth_moment);
    if (!p.contraction_norms.empty()) {
      Json norms = Json::object();
      for (std::size_t k = 0; k < p.contraction_norms.size(); ++k) {
        norms["r" + std::to_string(k + 1)] = p.contraction_norms[k];
      }
      q["contraction_norms"] = norms;
    }
    put(q, "chi_square_defect", p.chi_square_defect);
    q["max_influence"] = p.max_influence;
    if (!p.ks.empty()) {
      Json ks = Json::object();
      for (const auto& k : p.ks) ks[k.law] = k.ks;
      q["ks"] = ks;
    }
    if (!p.cross_moments.empty()) q["cross_moments"] = matrix(p.cross_moments);
    if (!p.delta.empty()) q["delta"] = matrix(p.delta);
    put(q, "covariance_residual", p.covariance_residual);
    put(q, "joint_ks", p.joint_ks);
    points.push_back(q);
  }
  j["points"] = points;
  Json stats = Json::array();
  for (const auto& s : r.statistics) {
    stats.push_back({{"statistic", s.statistic},
                     {"values", s.values},
                     {"trend", std::string(to_string(s.trend))},
                     {"below_threshold", s.below_threshold},
                     {"passed", s.passed}});
  }
  j["statistics"] = stats;
  if (r.de_jong) {
    const auto& d = *r.de_jong;
    Json dj;
    dj["law"] = d.law;
    dj["fourth_moment"] = to_json(d.fourth_moment);
    dj["max_influence"] = d.max_influence;
    put(dj, "ks", d.ks);
    put(dj, "dkw_band", d.dkw_band);
    dj["fourth_moment_close"] = d.fourth_moment_close;
    dj["influence_small"] = d.influence_small;
    dj["smooth_bound"] = to_json(d.smooth_bound);
    dj["wasserstein_bound"] = to_json(d.wasserstein);
    j["de_jong"] = dj;
  }
  put(j, "dkw_band", r.dkw_band);
  put(j, "terminal_ks_spread", r.terminal_ks_spread);
  j["flagged"] = r.flagged;
  if (r.verdict) {
    j["verdict"] = *r.verdict ? "positive" : "negative";
  } else {
    j["verdict"] = "undefined";
  }
  return j;
}

Json simulation_json(const SymmetricKernel& f, const DistributionSpec& law, const SampleSummary& s,
                     std::optional<int> nu) {
  Json j;
  j["kind"] = "simulation";
  j["law"] = law.name();
  j["n"] = s.n;
  j["order"] = f.order();
  j["dimension"] = f.dimension();
  j["variance_exact"] = gaussian_second_moment(f);
  Json moments = Json::array();
  for (std::size_t k = 0; k < s.moments.size(); ++k) {
    moments.push_back({{"k", k + 1}, {"value", s.moments[k].value}, {"std_error", s.moments[k].std_error}});
  }
  j["moments"] = moments;
  j["abs_third"] = {{"value", s.abs_third.value}, {"std_error", s.abs_third.std_error}};
  if (nu) {
    j["target"] = "chi2";
    j["nu"] = *nu;
    j["ks"] = ks_chi2(s, *nu);
  } else {
    j["target"] = "normal";
    j["ks"] = ks_normal(s);
  }
  j["dkw_band"] = dkw_band(s.n);
  j["quantiles"] = quantile_column(s.sorted);
  return j;
}

Json vector_simulation_json(const std::vector<SymmetricKernel>& kernels, const DistributionSpec& law,
                            const VectorSampleSummary& s) {
  Json j;
  j["kind"] = "vector_simulation";
  j["law"] = law.name();
  j["n"] = s.n;
  j["m"] = s.m;
  Json gaussian = Json::array();
  for (const auto& a : kernels) {
    std::vector<double> row;
    for (const auto& b : kernels) row.push_back(gaussian_cross_moment(a, b));
    gaussian.push_back(row);
  }
  j["covariance_exact"] = gaussian;
  j["covariance"] = matrix(s.covariance);
  j["covariance_std_error"] = matrix(s.covariance_std_error);
  j["marginal_ks"] = s.marginal_ks;
  j["dkw_band"] = dkw_band(s.n);
  return j;
}

Json kernel_summary(const SymmetricKernel& f) {
  const auto inf = influence_profile(f);
  Json j;
  j["d"] = f.order();
  j["N"] = f.dimension();
  j["entries"] = f.entry_count();
  j["squared_norm"] = f.squared_norm();
  j["variance"] = gaussian_second_moment(f);
  double lo = inf.values.empty() ? 0.0 : inf.values.front();
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < inf.values.size(); ++i) {
    lo = std::min(lo, inf.values[i]);
    if (inf.values[i] > inf.values[argmax]) argmax = i;
  }
  j["influence"] = {{"max", inf.max}, {"argmax", argmax + 1}, {"min", lo}, {"sum", inf.sum}};
  return j;
}

}  // namespace homsum::cli
