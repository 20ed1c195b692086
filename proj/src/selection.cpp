#include "bergman/selection.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

namespace bergman {

std::vector<std::vector<DyadicArc>> layerize(const std::vector<DyadicArc>& arcs) {
  std::set<DyadicArc> members(arcs.begin(), arcs.end());
  std::vector<std::vector<DyadicArc>> layers;
  if (members.empty()) return layers;
  const Grid g = members.begin()->grid;
  for (const auto& a : members) {
    if (a.grid != g) throw std::invalid_argument("layerize needs arcs of a single grid");
  }
  for (const auto& a : members) {
    std::size_t depth = 0;
    for (DyadicArc p = a; !p.is_root();) {
      p = p.parent();
      if (members.count(p)) ++depth;
    }
    if (layers.size() <= depth) layers.resize(depth + 1);
    layers[depth].push_back(a);
  }
  return layers;
}

int stopping_depth(double alpha, double cw, double binf) {
  require_alpha(alpha);
  if (!(cw >= 1.0) || !(binf >= 1.0)) throw std::invalid_argument("constants must be >= 1");
  const double delta = std::pow(0.75, alpha + 1.0);
  const double x = (std::log(8.0 * cw) - std::log(1.0 - delta)) / (-std::log(delta)) *
                   (1.0 + std::pow(2.0, alpha + 3.0) * binf);
  return static_cast<int>(std::ceil(x));
}

SelectionCertificate exceptional_sets(const RealFunction& f, const Weight& w, Grid grid, int j, double alpha,
                                      int depth, std::optional<int> n0_override) {
  require_alpha(alpha);
  if (j < 0) throw std::invalid_argument("band index j must be >= 0");
  const ArcFamily family = ArcFamily::single(depth, grid);
  SelectionCertificate cert;
  cert.grid = grid;
  cert.band = j;
  cert.depth = depth;
  cert.alpha = alpha;
  cert.cw = top_regularity_cw(w, family);
  cert.binf = binf_constant(w, family, alpha);
  cert.n0_formula = stopping_depth(alpha, cert.cw, cert.binf);
  cert.n0 = n0_override.value_or(cert.n0_formula);
  if (cert.n0 < 1) throw std::invalid_argument("stopping depth must be positive");
  cert.overlap_constant_ratio = cert.n0_formula / ((1.0 + std::log(cert.cw)) * cert.binf);

  const MeshPtr mesh = family_mesh(common_mesh(f.mesh_ptr(), w.mesh_ptr()), family);
  const auto idx = BoxIndex::get(mesh, grid, depth);
  const Eigen::VectorXd m = mesh->masses(alpha);
  const Eigen::VectorXd wm = w.function().on(mesh).values().cwiseProduct(m);
  const Eigen::VectorXd fwm = f.on(mesh).values().cwiseAbs().cwiseProduct(wm);
  const Eigen::VectorXd W = idx->box_sums(wm);
  const Eigen::VectorXd F = idx->box_sums(fwm);
  const Eigen::VectorXd M = idx->box_sums(m);

  const double lo = std::ldexp(1.0, -j - 1);
  const double hi = std::ldexp(1.0, -j);
  std::vector<DyadicArc> chosen;
  for (std::size_t s = 0; s < idx->slot_count(); ++s) {
    const double avg = F[static_cast<Eigen::Index>(s)] / W[static_cast<Eigen::Index>(s)];
    if (avg >= lo && avg <= hi) chosen.push_back(idx->arc(s));
  }
  cert.layers = layerize(chosen);
  cert.overlap.assign(mesh->size(), 0);
  std::vector<int> layer_of(idx->slot_count(), -1);
  for (std::size_t i = 0; i < cert.layers.size(); ++i) {
    for (const auto& a : cert.layers[i]) layer_of[BoxIndex::slot(a)] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < cert.layers.size(); ++i) {
    for (const auto& a : cert.layers[i]) {
      const std::size_t s = BoxIndex::slot(a);
      const int target = static_cast<int>(i) + cert.n0;
      SelectedArc rec;
      rec.arc = a;
      rec.layer = static_cast<int>(i);
      rec.box_integral = F[static_cast<Eigen::Index>(s)];
      rec.box_mass = M[static_cast<Eigen::Index>(s)];
      rec.starved = a.level + cert.n0 > depth;
      std::set<std::size_t> removed_boxes;
      for (std::size_t c : idx->box_cells(s)) {
        bool removed = false;
        for (int lv = a.level + 1; lv <= idx->cell_level(c) && !removed; ++lv) {
          const std::size_t k = idx->ancestor_slot(c, lv);
          if (layer_of[k] == target) {
            removed = true;
            removed_boxes.insert(k);
          }
        }
        const auto ci = static_cast<Eigen::Index>(c);
        if (!removed) {
          rec.kept_integral += fwm[ci];
          rec.kept_mass += m[ci];
          ++cert.overlap[c];
        }
      }
      for (std::size_t k : removed_boxes) rec.removed_mass += M[static_cast<Eigen::Index>(k)];
      rec.pass = within(rec.box_integral, 6.0 * rec.kept_integral);
      cert.factor_pass = cert.factor_pass && rec.pass;
      if (rec.starved) ++cert.starved;
      cert.arcs.push_back(rec);
    }
  }
  for (int v : cert.overlap) cert.max_overlap = std::max(cert.max_overlap, v);
  cert.overlap_pass = cert.max_overlap <= cert.n0;
  return cert;
}

nlohmann::json SelectionCertificate::to_json() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto& layer : layers) {
    nlohmann::json l = nlohmann::json::array();
    for (const auto& a : layer) l.push_back(a.label());
    layers_json.push_back(l);
  }
  nlohmann::json arcs_json = nlohmann::json::array();
  for (const auto& a : arcs) {
    arcs_json.push_back({{"arc", a.arc.label()},
                         {"layer", a.layer},
                         {"box_integral", a.box_integral},
                         {"kept_integral", a.kept_integral},
                         {"box_mass", a.box_mass},
                         {"kept_mass", a.kept_mass},
                         {"removed_mass", a.removed_mass},
                         {"starved", a.starved},
                         {"pass", a.pass}});
  }
  return {{"grid", to_string(grid)},
          {"j", band},
          {"depth", depth},
          {"alpha", alpha},
          {"c_w", cw},
          {"b_inf", binf},
          {"n0", n0},
          {"n0_formula", n0_formula},
          {"layers", layers_json},
          {"arcs", arcs_json},
          {"max_overlap", max_overlap},
          {"factor_pass", factor_pass},
          {"overlap_pass", overlap_pass},
          {"starved", starved},
          {"overlap_constant_ratio", overlap_constant_ratio}};
}

InequalityReport packing_check(const std::vector<DyadicArc>& arcs, const Weight& w, double alpha, int depth) {
  require_alpha(alpha);
  if (arcs.empty()) throw std::invalid_argument("packing check needs at least one arc");
  const Grid grid = arcs.front().grid;
  const auto layers = layerize(arcs);
  const ArcFamily family = ArcFamily::single(depth, grid);
  const MeshPtr mesh = family_mesh(w.mesh_ptr(), family);
  const auto idx = BoxIndex::get(mesh, grid, depth);
  const Eigen::VectorXd W = idx->box_sums(w.function().on(mesh).values().cwiseProduct(mesh->masses(alpha)));
  double lhs = 0.0;
  std::set<DyadicArc> unique(arcs.begin(), arcs.end());
  for (const auto& a : unique) {
    if (a.is_root()) throw std::invalid_argument("packing check takes arcs of level >= 0");
    if (a.level > depth) throw std::invalid_argument("arc deeper than the packing depth");
    lhs += W[static_cast<Eigen::Index>(BoxIndex::slot(a))];
  }
  double union_mass = 0.0;
  for (const auto& a : layers.front()) union_mass += W[static_cast<Eigen::Index>(BoxIndex::slot(a))];
  const double B = binf_constant(w, family, alpha);
  InequalityReport r;
  r.theorem = "carleson_packing";
  r.alpha = alpha;
  r.depth = depth;
  r.weight_id = w.id();
  r.f_id = std::to_string(unique.size()) + " arcs";
  r.grid_mode = "grid(" + to_string(grid) + ")";
  r.set_sides(lhs, box_to_top_constant(alpha) * B * union_mass);
  r.pass = within(r.lhs, r.rhs_explicit);
  r.failed = r.pass ? 0 : 1;
  r.provenance = "B_inf=" + format_double(B) + ";union=" + format_double(union_mass);
  return r;
}

MinSum min_sum_bound(double g1, double g2, double eta, double delta, int K) {
  if (!(g1 > 0.0) || !(g2 > 0.0) || !(eta > 0.0) || !(delta >= 0.0)) {
    throw std::invalid_argument("min-sum parameters need g1, g2, eta > 0 and delta >= 0");
  }
  if (K < 64) throw std::invalid_argument("min-sum truncation K must be >= 64");
  MinSum out;
  const double L = std::log2(eta * g2 / g1);
  for (int k = 0; k <= K; ++k) {
    const double a = g1 * std::ldexp(1.0, -k);
    const double b = eta * g2 * std::exp2((delta - 1.0) * k);
    const double jstar = std::max(0.0, std::ceil(L + delta * k));
    out.truncated += jstar * a + 2.0 * b * std::exp2(-jstar);
  }
  out.tail = g1 * ((3.0 + std::max(0.0, L)) + delta * (K + 2.0)) * std::ldexp(1.0, -K);
  out.lhs = out.truncated + out.tail;
  return out;
}

MinSumFit fit_min_sum_constant(double delta, int K, const std::vector<double>& gammas,
                               const std::vector<double>& etas) {
  MinSumFit best;
  best.delta = delta;
  best.K = K;
  best.constant = -std::numeric_limits<double>::infinity();
  for (double g1 : gammas) {
    for (double g2 : gammas) {
      for (double eta : etas) {
        const MinSum s = min_sum_bound(g1, g2, eta, delta, K);
        const double c = (s.lhs - eta / 2.0) / (g1 * std::log2(std::numbers::e + g2));
        if (c > best.constant) {
          best.constant = c;
          best.g1 = g1;
          best.g2 = g2;
          best.eta = eta;
        }
      }
    }
  }
  return best;
}

}  // namespace bergman
