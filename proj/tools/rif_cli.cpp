// Command-line front end: samplers, couplings and diagnostics with CSV/JSON
// output. Every command is deterministic given --seed (independent of the
// thread count).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rif/atlas.hpp"
#include "rif/coupling.hpp"
#include "rif/fli.hpp"
#include "rif/kernel.hpp"
#include "rif/potential.hpp"
#include "rif/runner.hpp"
#include "rif/slt.hpp"
#include "rif/stats.hpp"
#include "rif/unimodular.hpp"

using nlohmann::json;
using namespace rif;

namespace {

struct Global {
  uint64_t seed = 1;
  std::string graph = "z3";
  uint64_t reps = 100;
  std::string out = "csv";
  unsigned threads = 0;
  std::ostream* os = &std::cout;
  std::ofstream file;
};

json vertex_json(const Lattice& g, const LatticeVertex& v) {
  json a = json::array();
  for (int j = 0; j < g.dim(); ++j) a.push_back(v.c[j]);
  return a;
}

template <class G>
json vertex_json(G& g, TreeSpace::Vertex v) {
  TreeSpace& s = g.space();
  std::string word;
  auto cur = v;
  while (true) {
    auto probe = cur;
    bool on_spine = false;
    if (s.height(probe) >= 0) {
      auto spine = s.origin();
      while (s.height(spine) < s.height(probe)) spine = s.parent(spine);
      on_spine = spine == probe;
    }
    if (on_spine) break;
    word.push_back(static_cast<char>('0' + s.child_index(cur)));
    cur = s.parent(cur);
  }
  std::reverse(word.begin(), word.end());
  return json{{"h", s.height(v)}, {"word", word}};
}

template <class G, class V>
json image_json(G& g, const LocalImage<V>& img) {
  json arr = json::array();
  for (const auto& [key, e] : img.shapes) {
    auto vs = traj_vertices(g, e.rep);
    json path = json::array();
    for (const auto& v : vs) path.push_back(vertex_json(g, v));
    for (double lab : e.labels) arr.push_back(json{{"path", path}, {"label", lab}});
  }
  return arr;
}

void emit(Global& gl, const json& j, const std::string& csv) {
  if (gl.out == "json")
    (*gl.os) << j.dump(2) << "\n";
  else
    (*gl.os) << csv;
}

int cmd_heatkernel(Global& gl, int nmax) {
  std::vector<HeatKernelRow> rows;
  if (gl.graph == "z3")
    rows = lattice_heat_profile(3, nmax);
  else if (gl.graph == "z4")
    rows = lattice_heat_profile(4, nmax);
  else if (gl.graph == "tree3")
    rows = tree_heat_profile(3, nmax);
  else if (gl.graph == "tree4")
    rows = tree_heat_profile(4, nmax);
  else
    throw CLI::ValidationError("heatkernel supports z3, z4, tree3, tree4");
  std::ostringstream csv;
  csv << "n,p_n,rescaled,running_max\n";
  json jr = json::array();
  double runmax = 0.0;
  for (const auto& r : rows) {
    runmax = std::max(runmax, r.rescaled);
    csv << r.n << "," << r.p << "," << r.rescaled << "," << runmax << "\n";
    jr.push_back(json{{"n", r.n}, {"p", r.p}, {"rescaled", r.rescaled}});
  }
  emit(gl, jr, csv.str());
  return 0;
}

int cmd_capacity(Global& gl, int ksize, double tol, int s_cap) {
  json out;
  CapacityResult r;
  if (gl.graph == "tree3" || gl.graph == "tree4") {
    const int deg = gl.graph == "tree3" ? 3 : 4;
    r = tree_capacity(deg, ksize, tol, 16, s_cap);
  } else if (gl.graph == "z3") {
    Lattice g(3);
    KSet<LatticeVertex> K{{g.origin()}};
    if (ksize == 2) K.verts.push_back(g.neighbor(g.origin(), 0));
    r = dense_capacity(g, K, tol, 8, std::min(s_cap, 48));
  } else if (gl.graph == "gp3") {
    Grandparent g(3);
    KSet<TreeSpace::Vertex> K{{g.origin()}};
    if (ksize == 2) K.verts.push_back(g.neighbor(g.origin(), 0));
    r = dense_capacity(g, K, tol, 4, std::min(s_cap, 8));
  } else {
    throw CLI::ValidationError("unknown graph");
  }
  out = json{{"graph", gl.graph}, {"K", ksize}, {"s", r.horizon},
             {"value", r.value},  {"gap", r.gap}, {"converged", r.converged}};
  std::ostringstream csv;
  csv << "value,gap,s,converged\n" << r.value << "," << r.gap << "," << r.horizon << "," << r.converged
      << "\n";
  emit(gl, out, csv.str());
  return r.converged ? 0 : 2;
}

template <class G>
int fli_stats(Global& gl, double v, int T, int window, bool labeled, bool dump) {
  struct Rep {
    std::vector<uint32_t> counts;
    size_t members = 0;
  };
  const auto res = run_replicas<Rep>(
      gl.reps,
      [&](uint64_t r) {
        G gg(3);
        auto wloc = make_window(gg, gg.origin(), window);
        Field f(gl.seed, r);
        Rep out;
        std::vector<uint32_t> per(wloc.size(), 0);
        if (labeled) {
          const auto m = sample_fli_labeled(gg, wloc, f, T);
          for (const auto& lw : m) per[wloc.index(lw.w.start)]++;
          out.members = m.size();
        } else {
          const auto m = sample_fli(gg, wloc, f, v, T);
          for (const auto& w : m) per[wloc.index(w.start)]++;
          out.members = m.size();
        }
        out.counts = std::move(per);
        return out;
      },
      gl.threads);
  std::vector<uint32_t> pooled;
  size_t total = 0;
  for (const auto& r : res) {
    pooled.insert(pooled.end(), r.counts.begin(), r.counts.end());
    total += r.members;
  }
  const double rate = labeled ? 1.0 / T : v;
  const auto gof = poisson_gof(pooled, rate, 0.01, gl.seed);
  std::ostringstream csv;
  csv << "reps,window,members,gof_stat,gof_p,pass\n";
  csv << gl.reps << "," << window << "," << total << "," << gof.statistic << "," << gof.p_value << ","
      << gof.pass << "\n";
  json j{{"reps", gl.reps},           {"window", window},     {"members", total},
         {"gof_stat", gof.statistic}, {"gof_p", gof.p_value}, {"pass", gof.pass}};
  if (dump) {
    Field f(gl.seed, 0);
    G gg(3);
    KSet<typename G::Vertex> K{{gg.origin()}};
    auto wloc = make_window(gg, gg.origin(), window);
    if (labeled) {
      auto img = localize(gg, sample_fli_labeled(gg, wloc, f, T), K);
      j["local_image"] = image_json(gg, img);
    } else {
      auto img = localize(gg, sample_fli(gg, wloc, f, v, T), K);
      j["local_image"] = image_json(gg, img);
    }
  }
  emit(gl, j, csv.str());
  return gof.pass ? 0 : 2;
}

int cmd_sample_fli(Global& gl, double v, int T, int window, bool labeled, bool dump) {
  if (gl.graph == "z3") return fli_stats<Lattice>(gl, v, T, window, labeled, dump);
  if (gl.graph == "tree3") return fli_stats<RegularTree>(gl, v, T, window, labeled, dump);
  if (gl.graph == "z4") {
    // same machinery on dimension 4
    struct Rep {
      std::vector<uint32_t> counts;
    };
    const auto res = run_replicas<Rep>(
        gl.reps,
        [&](uint64_t r) {
          Lattice gg(4);
          LatticeWindow wloc(gg, gg.origin(), window);
          Field f(gl.seed, r);
          std::vector<uint32_t> per(wloc.size(), 0);
          for (const auto& w : sample_fli(gg, wloc, f, v, T)) per[wloc.index(w.start)]++;
          return Rep{std::move(per)};
        },
        gl.threads);
    std::vector<uint32_t> pooled;
    for (const auto& r : res) pooled.insert(pooled.end(), r.counts.begin(), r.counts.end());
    const auto gof = poisson_gof(pooled, v, 0.01, gl.seed);
    emit(gl, json{{"gof_p", gof.p_value}, {"pass", gof.pass}},
         "gof_p,pass\n" + std::to_string(gof.p_value) + "," + std::to_string(gof.pass) + "\n");
    return gof.pass ? 0 : 2;
  }
  throw CLI::ValidationError("sample-fli supports z3, z4, tree3");
}

template <class G>
int ri_stats(Global& gl, const RiLocalParams& par, bool dump) {
  struct Rep {
    uint32_t kept = 0;
    int64_t visits = 0;
    uint32_t late = 0;
  };
  const auto res = run_replicas<Rep>(
      gl.reps,
      [&](uint64_t r) {
        G gg(3);
        KSet<typename G::Vertex> K{{gg.origin()}};
        Field f(gl.seed, r);
        const auto s = sample_ri_local(gg, K, f, par);
        return Rep{static_cast<uint32_t>(s.kept.size()), s.visits_K, s.late_returns};
      },
      gl.threads);
  std::vector<uint32_t> kept;
  double visits = 0;
  uint64_t late = 0;
  for (const auto& r : res) {
    kept.push_back(r.kept);
    visits += static_cast<double>(r.visits);
    late += r.late;
  }
  const double lt = visits / gl.reps;
  std::vector<double> keptd(kept.begin(), kept.end());
  json j{{"reps", gl.reps},
         {"u", par.u},
         {"mean_kept", mean_var(keptd).mean},
         {"local_time_estimate", lt},
         {"late_return_fraction", static_cast<double>(late) / gl.reps}};
  if constexpr (std::is_same_v<G, RegularTree>) {
    const auto cap = tree_capacity(3, 1, 1e-6);
    const auto gof = poisson_gof(kept, par.u * cap.value, 0.01, gl.seed);
    j["cap"] = cap.value;
    j["kept_gof_p"] = gof.p_value;
    j["kept_gof_pass"] = gof.pass;
  }
  if (dump) {
    G gg(3);
    KSet<typename G::Vertex> K{{gg.origin()}};
    Field f(gl.seed, 0);
    const auto s = sample_ri_local(gg, K, f, par);
    j["local_image"] = image_json(gg, s.image);
  }
  std::ostringstream csv;
  csv << "reps,u,mean_kept,local_time,late_fraction\n"
      << gl.reps << "," << par.u << "," << j["mean_kept"].get<double>() << "," << lt << ","
      << j["late_return_fraction"].get<double>() << "\n";
  emit(gl, j, csv.str());
  return 0;
}

int cmd_sample_ri(Global& gl, double u, int sbwd, int rstop, int sfwd, bool dump) {
  RiLocalParams par = gl.graph == "tree3" ? ri_defaults_tree() : ri_defaults_lattice();
  par.u = u;
  if (sbwd > 0) par.s_bwd = sbwd;
  if (rstop > 0) par.r_stop = rstop;
  if (sfwd > 0) par.s_fwd = sfwd;
  if (gl.graph == "z3") return ri_stats<Lattice>(gl, par, dump);
  if (gl.graph == "tree3") return ri_stats<RegularTree>(gl, par, dump);
  throw CLI::ValidationError("sample-ri supports z3, tree3");
}

int cmd_wusf(Global& gl, double u, int window, int inner) {
  if (gl.graph != "z3") throw CLI::ValidationError("wusf demo runs on z3");
  struct Rep {
    size_t covered = 0, uncovered = 0;
    bool acyclic = true;
  };
  const auto res = run_replicas<Rep>(
      gl.reps,
      [&](uint64_t r) {
        Lattice g(3);
        LatticeWindow win(g, g.origin(), window);
        auto par = ri_defaults_lattice();
        par.u = u;
        par.s_bwd = 400;
        par.r_stop = 25;
        par.s_fwd = 150;
        par.hard_cap = 30000;
        Field f(gl.seed, r);
        const auto w = wusf_from_ri(g, win, inner, f, par);
        return Rep{w.covered, w.uncovered.size(), w.acyclic};
      },
      gl.threads);
  size_t cyc = 0, unc = 0;
  std::ostringstream csv;
  csv << "rep,covered,uncovered,acyclic\n";
  for (size_t r = 0; r < res.size(); ++r) {
    csv << r << "," << res[r].covered << "," << res[r].uncovered << "," << res[r].acyclic << "\n";
    cyc += res[r].acyclic ? 0 : 1;
    unc += res[r].uncovered;
  }
  json j{{"reps", gl.reps}, {"cycles", cyc}, {"uncovered_total", unc}};
  emit(gl, j, csv.str());
  return cyc == 0 ? 0 : 2;
}

int cmd_match(Global& gl, double alpha, int L, int window, int inner, bool dump) {
  if (gl.graph != "z3") throw CLI::ValidationError("match runs on z3");
  LatticeKernel kern(3, 2 * L);
  const int rt = slt_support_radius(L, 3);
  const auto tab = make_ball_table(kern, L, rt);
  const double p2l = kern.eval(2 * L, {0, 0, 0, 0});

  struct Rep {
    double g_o = 0.0;
    double unmatched = 0.0, phantom = 0.0;
    std::vector<double> etas;
    uint64_t guard = 0;
  };
  const auto res = run_replicas<Rep>(
      gl.reps,
      [&](uint64_t r) {
        Lattice g(3);
        Field f(gl.seed, r);
        LatticeWindow win(g, g.origin(), window);
        SltParams par;
        par.alpha = alpha;
        par.L = L;
        SltLattice slt(g, win, tab, nullptr, f, par);
        std::vector<SltPoint<LatticeVertex>> r1, r2;
        for (size_t i = 0; i < win.size(); ++i) {
          const auto x = win.vertex(i);
          const uint32_t n1 = f.poisson(Lane::StartCount, g.key(x), 10, alpha);
          for (uint32_t k = 0; k < n1; ++k) r1.push_back({x, k});
          const uint32_t n2 = f.poisson(Lane::StartCount, g.key(x), 11, alpha);
          for (uint32_t k = 0; k < n2; ++k) r2.push_back({x, k});
        }
        slt.build_field(r2);
        const auto m = slt.match(r1, {g.origin()});
        Rep out;
        out.g_o = m.g_probe[0];
        out.guard = m.guard_violations;
        std::map<std::pair<size_t, uint32_t>, bool> consumed;
        size_t phant = 0;
        for (size_t i = 0; i < r1.size(); ++i) {
          const auto& pr = m.pairs[i];
          if (pr.real)
            consumed[{win.index(pr.y), pr.r2_occ}] = true;
          else if (win.inner(pr.y, inner))
            ++phant;
          if (win.inner(r1[i].x, inner)) out.etas.push_back(pr.eta);
        }
        size_t unma = 0;
        for (const auto& p : r2)
          if (win.inner(p.x, inner) && !consumed.count({win.index(p.x), p.occ})) ++unma;
        const double inner_n = std::pow(2.0 * inner + 1.0, 3.0);
        out.unmatched = unma / inner_n;
        out.phantom = phant / inner_n;
        return out;
      },
      gl.threads);
  std::vector<double> gs, unm, pha, etas;
  uint64_t guard = 0;
  for (const auto& r : res) {
    gs.push_back(r.g_o);
    unm.push_back(r.unmatched);
    pha.push_back(r.phantom);
    guard += r.guard;
    const size_t stride = 1 + r.etas.size() / 64;
    for (size_t i = 0; i < r.etas.size(); i += stride) etas.push_back(r.etas[i]);
  }
  const auto mvg = mean_var(gs);
  const auto eks = etas.size() >= 1000 ? exp1_ks(etas, 0.01, gl.seed) : TestReport{};
  const double bound = std::sqrt(2.0 * alpha * p2l);
  json j{{"alpha", alpha},
         {"L", L},
         {"mean_g", mvg.mean},
         {"var_g", mvg.var},
         {"theory_var", 2.0 * alpha * p2l},
         {"unmatched_rate", mean_var(unm).mean},
         {"phantom_rate", mean_var(pha).mean},
         {"rate_bound", bound},
         {"eta_ks_p", eks.p_value},
         {"guard_violations", guard}};
  std::ostringstream csv;
  csv << "mean_g,var_g,theory_var,unmatched,phantom,bound,eta_ks_p\n"
      << mvg.mean << "," << mvg.var << "," << 2.0 * alpha * p2l << "," << mean_var(unm).mean << ","
      << mean_var(pha).mean << "," << bound << "," << eks.p_value << "\n";
  if (dump) {
    Lattice g(3);
    Field f(gl.seed, 0);
    json pairs = json::array();
    LatticeWindow win(g, g.origin(), window);
    SltParams par;
    par.alpha = alpha;
    par.L = L;
    SltLattice slt(g, win, tab, nullptr, f, par);
    std::vector<SltPoint<LatticeVertex>> r1, r2;
    for (size_t i = 0; i < win.size(); ++i) {
      const auto x = win.vertex(i);
      const uint32_t n1 = f.poisson(Lane::StartCount, g.key(x), 10, alpha);
      for (uint32_t k = 0; k < n1; ++k) r1.push_back({x, k});
      const uint32_t n2 = f.poisson(Lane::StartCount, g.key(x), 11, alpha);
      for (uint32_t k = 0; k < n2; ++k) r2.push_back({x, k});
    }
    slt.build_field(r2);
    const auto m = slt.match(r1, {g.origin()});
    for (size_t i = 0; i < r1.size(); ++i)
      pairs.push_back(json{{"x", vertex_json(g, r1[i].x)},
                           {"y", vertex_json(g, m.pairs[i].y)},
                           {"eta", m.pairs[i].eta},
                           {"t", m.pairs[i].t},
                           {"round", m.pairs[i].round},
                           {"real", m.pairs[i].real}});
    j["pairs"] = pairs;
  }
  emit(gl, j, csv.str());
  return 0;
}

int cmd_couple(Global& gl, int T, double v, int window, int matchradius) {
  if (gl.graph != "z3") throw CLI::ValidationError("couple runs on z3");
  const int L = doubling_bridge_len(T, v);
  const int rt = slt_support_radius(L, 3);
  LatticeKernel kern(3, std::max(2 * L, 2));
  const auto tab = make_ball_table(kern, L, rt);
  const double p2l = kern.eval(2 * L, {0, 0, 0, 0});
  struct Rep {
    BadEvents<LatticeVertex> ev;
    uint32_t far_hits = 0;
    uint64_t guard = 0;
  };
  const auto res = run_replicas<Rep>(
      gl.reps,
      [&](uint64_t r) {
        Lattice g(3);
        Field f(gl.seed, r);
        LatticeWindow win(g, g.origin(), window);
        CoupleConfig cfg;
        cfg.match_radius = matchradius;
        LatticeCoupleOps ops(g, win, f, cfg);
        KSet<LatticeVertex> K{{g.origin()}};
        const auto input = sample_fli(g, win, f, v, T);
        DoublingTrace<LatticeVertex> tr;
        ops.run(input, v, T, L, rt, kern, tab, 1, &K, &tr);
        Rep out;
        out.ev = bad_event_probe(g, input, tr, K, T);
        out.far_hits = tr.far_tail_probe_hits;
        out.guard = tr.guard_violations;
        return out;
      },
      gl.threads);
  double f2 = 0, f3 = 0, f4 = 0, f5 = 0, fm = 0, f1 = 0;
  uint64_t guard = 0, farh = 0;
  for (const auto& r : res) {
    f1 += r.ev.additivity_broken;
    f2 += r.ev.rewiring_visible;
    f3 += r.ev.bridge_hits;
    f4 += r.ev.stitching_visible;
    f5 += r.ev.trim_visible;
    fm += r.ev.mismatch;
    guard += r.guard;
    farh += r.far_hits;
  }
  const double n = static_cast<double>(gl.reps);
  json j{{"T", T},
         {"v", v},
         {"L", L},
         {"freq_additivity", f1 / n},
         {"freq_rewiring", f2 / n},
         {"bound_rewiring", 2.0 * T * std::sqrt(v * p2l)},
         {"freq_bridge_hits", f3 / n},
         {"bound_bridge_hits", v / 2.0 * (L + 1)},
         {"freq_stitching", f4 / n},
         {"freq_trim", f5 / n},
         {"bound_trim", v / 2.0 * (L - 1)},
         {"freq_mismatch", fm / n},
         {"guard_violations", guard},
         {"far_tail_probe_hits", farh}};
  std::ostringstream csv;
  csv << "T,v,L,mismatch,ev2,ev3,ev4,ev5\n"
      << T << "," << v << "," << L << "," << fm / n << "," << f2 / n << "," << f3 / n << "," << f4 / n
      << "," << f5 / n << "\n";
  emit(gl, j, csv.str());
  const bool ok = f1 == 0 && f2 / n <= 2.0 * T * std::sqrt(v * p2l) && f3 / n <= v / 2.0 * (L + 1) &&
                  f5 / n <= v / 2.0 * (L - 1);
  return ok ? 0 : 2;
}

int cmd_cascade(Global& gl, int nmax, int window) {
  struct Rep {
    std::vector<double> dks;
  };
  std::vector<Rep> res;
  if (gl.graph == "tree3") {
    res = run_replicas<Rep>(
        gl.reps,
        [&](uint64_t r) {
          RegularTree g(3);
          Field f(gl.seed, r);
          auto win = make_window(g, g.origin(), window);
          TreeCoupleOps ops(g, std::move(win), f);
          KSet<TreeSpace::Vertex> K{{g.origin()}};
          const auto levels = cascade(ops, nmax, K, nullptr);
          Rep out;
          for (const auto& lev : levels) out.dks.push_back(lev.d_K);
          return out;
        },
        gl.threads);
  } else if (gl.graph == "z3") {
    res = run_replicas<Rep>(
        gl.reps,
        [&](uint64_t r) {
          Lattice g(3);
          Field f(gl.seed, r);
          LatticeWindow win(g, g.origin(), window);
          LatticeCoupleOps ops(g, win, f);
          KSet<LatticeVertex> K{{g.origin()}};
          const auto levels = cascade(ops, nmax, K, nullptr);
          Rep out;
          for (const auto& lev : levels) out.dks.push_back(lev.d_K);
          return out;
        },
        gl.threads);
  } else {
    throw CLI::ValidationError("cascade supports tree3, z3");
  }
  json jl = json::array();
  std::ostringstream csv;
  csv << "n,T,median_dK,mean_dK,q90_dK\n";
  for (int n = 0; n < nmax; ++n) {
    std::vector<double> d;
    for (const auto& r : res) d.push_back(r.dks[n]);
    std::sort(d.begin(), d.end());
    const double median = d[d.size() / 2];
    const double q90 = d[(d.size() * 9) / 10];
    jl.push_back(json{{"n", n}, {"T", 1 << n}, {"median_dK", median}, {"mean_dK", mean_var(d).mean},
                      {"q90_dK", q90}});
    csv << n << "," << (1 << n) << "," << median << "," << mean_var(d).mean << "," << q90 << "\n";
  }
  emit(gl, jl, csv.str());
  return 0;
}

int cmd_equivariance(Global& gl, const std::string& shift, int T, int window) {
  if (gl.graph != "z3") throw CLI::ValidationError("equivariance test runs on z3");
  LatticeVertex gamma{};
  {
    std::istringstream is(shift);
    std::string tok;
    int j = 0;
    while (std::getline(is, tok, ',') && j < 3) gamma.c[j++] = std::stoi(tok);
  }
  const double v = 1.0 / T;
  bool ok = true;

  Lattice ga(3);
  Field f(gl.seed);
  LatticeWindow wa(ga, ga.origin(), window);
  LatticeCoupleOps opsa(ga, wa, f);
  const auto ina = sample_fli(ga, wa, f, v, T);
  const auto outa = opsa.double_unlabeled(ina, v, T, 1, nullptr, nullptr);

  Lattice gb(3);
  gb.set_stream_shift(gamma);
  LatticeWindow wb(gb, gamma, window);
  LatticeCoupleOps opsb(gb, wb, f);
  const auto inb = sample_fli(gb, wb, f, v, T);
  const auto outb = opsb.double_unlabeled(inb, v, T, 1, nullptr, nullptr);
  ok = ok && measures_identical(inb, translate_measure(ina, gamma));
  ok = ok && measures_identical(outb, translate_measure(outa, gamma));

  KSet<LatticeVertex> Ka{{ga.origin()}}, Kb{{gamma}};
  LabeledMeasure<LatticeVertex> topa, topb;
  cascade(opsa, 5, Ka, &topa);
  cascade(opsb, 5, Kb, &topb);
  ok = ok && labeled_identical(topb, translate_measure(topa, gamma));

  json j{{"shift", shift}, {"T", T}, {"bit_exact", ok}};
  emit(gl, j, std::string("shift,T,bit_exact\n") + shift + "," + std::to_string(T) + "," +
                  (ok ? "1" : "0") + "\n");
  return ok ? 0 : 2;
}

int cmd_unimod(Global& gl, const std::string& check) {
  json j;
  if (check == "mtp" || check == "tilted") {
    Grandparent g(3);
    GpTransport f;
    f.radius = 2;
    f.w[{2, 0}] = 1.0;
    const auto s = mass_transport_sums(g, f, g.origin(), 3);
    j = json{{"check", check},
             {"sent", s.sent},
             {"received", s.received},
             {"tilted_received", s.tilted_received}};
    std::ostringstream csv;
    csv << "sent,received,tilted\n" << s.sent << "," << s.received << "," << s.tilted_received << "\n";
    emit(gl, j, csv.str());
    return (s.sent == s.tilted_received && s.received != s.sent) ? 0 : 2;
  }
  if (check == "drift") {
    Grandparent g(3);
    const double d = modular_drift(g);
    j = json{{"check", "drift"}, {"value", d}, {"exact", -(7.0 / 8.0) * std::log(2.0)}};
    emit(gl, j, "drift\n" + std::to_string(d) + "\n");
    return std::abs(d + (7.0 / 8.0) * std::log(2.0)) < 1e-12 ? 0 : 2;
  }
  if (check == "root") {
    struct Rep {
      bool resolved;
    };
    const auto res = run_replicas<Rep>(
        gl.reps,
        [&](uint64_t r) {
          Grandparent gg(3);
          Field f(gl.seed, r);
          const auto b = sample_srw(gg, f, gg.origin(), 200, Lane::BwdStep, 0);
          const auto w = sample_srw(gg, f, gg.origin(), 200, Lane::FwdStep, 0);
          return Rep{root_map(gg, b, w).resolved};
        },
        gl.threads);
    size_t unresolved = 0;
    for (const auto& r : res) unresolved += r.resolved ? 0 : 1;
    const double frac = static_cast<double>(unresolved) / gl.reps;
    j = json{{"check", "root"}, {"unresolved_fraction", frac}, {"reps", gl.reps}};
    emit(gl, j, "unresolved\n" + std::to_string(frac) + "\n");
    return frac <= 0.01 ? 0 : 2;
  }
  if (check == "localtime") {
    const double u = 1.0;
    RiLocalParams par = gl.graph == "tree3" ? ri_defaults_tree() : ri_defaults_lattice();
    par.u = u;
    struct Rep {
      int64_t visits;
    };
    double est = 0.0;
    if (gl.graph == "tree3") {
      const auto res = run_replicas<Rep>(
          gl.reps,
          [&](uint64_t r) {
            RegularTree gg(3);
            KSet<TreeSpace::Vertex> K{{gg.origin()}};
            Field f(gl.seed, r);
            return Rep{sample_ri_local(gg, K, f, par).visits_K};
          },
          gl.threads);
      for (const auto& r : res) est += static_cast<double>(r.visits);
    } else if (gl.graph == "z3") {
      const auto res = run_replicas<Rep>(
          gl.reps,
          [&](uint64_t r) {
            Lattice gg(3);
            KSet<LatticeVertex> K{{gg.origin()}};
            Field f(gl.seed, r);
            return Rep{sample_ri_local(gg, K, f, par).visits_K};
          },
          gl.threads);
      for (const auto& r : res) est += static_cast<double>(r.visits);
    } else {
      throw CLI::ValidationError("localtime runs on z3 or tree3");
    }
    est /= static_cast<double>(gl.reps);
    j = json{{"check", "localtime"}, {"estimate", est}, {"expected", u}};
    emit(gl, j, "estimate,expected\n" + std::to_string(est) + "," + std::to_string(u) + "\n");
    return std::abs(est - u) < 4.0 * std::sqrt(3.0 / static_cast<double>(gl.reps)) ? 0 : 2;
  }
  throw CLI::ValidationError("unknown unimod check");
}

int cmd_selftest(Global& gl) {
  int rc = 0;
  Global g2;
  g2.seed = gl.seed;
  g2.threads = gl.threads;
  std::ostringstream sink;
  g2.os = &sink;
  g2.graph = "z3";
  g2.reps = 20;
  rc |= cmd_sample_fli(g2, 0.5, 4, 8, false, false);
  g2.graph = "tree3";
  g2.reps = 3000;
  rc |= cmd_sample_ri(g2, 1.0, 0, 0, 0, false);
  g2.graph = "gp3";
  rc |= cmd_unimod(g2, "drift");
  rc |= cmd_unimod(g2, "tilted");
  g2.graph = "z3";
  rc |= cmd_equivariance(g2, "1,0,-1", 8, 12);
  g2.graph = "tree3";
  rc |= cmd_capacity(g2, 1, 1e-6, 1 << 14);
  (*gl.os) << (rc == 0 ? "selftest: PASS\n" : "selftest: FAIL\n");
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-interlacement factor-of-iid simulation kit"};
  app.require_subcommand(1);
  app.fallthrough();

  Global gl;
  std::string config_path, out_path;
  app.add_option("--seed", gl.seed, "master seed");
  app.add_option("--graph", gl.graph, "z3|z4|tree3|tree4|gp3");
  app.add_option("--reps", gl.reps, "replica count");
  app.add_option("--out", gl.out, "csv|json");
  app.add_option("--threads", gl.threads, "worker threads (0 = auto)");
  app.add_option("--config", config_path, "JSON config mirroring the flags");
  app.add_option("--outfile", out_path, "write output to a file");

  double v = 0.5, u = 1.0, alpha = 0.5, tol = 1e-6;
  int T = 8, window = 10, inner = 5, sbwd = 0, rstop = 0, sfwd = 0;
  int ksize = 1, scap = 1 << 14, nmax = 400, L = 6, matchradius = -1, cnmax = 8;
  bool labeled = false, dump = false;
  std::string shift = "1,0,0", check = "drift";

  auto* fli = app.add_subcommand("sample-fli", "finite-length interlacement sampler");
  fli->add_option("--v", v);
  fli->add_option("--T", T);
  fli->add_option("--window", window);
  fli->add_flag("--labeled", labeled);
  fli->add_flag("--dump", dump);

  auto* ri = app.add_subcommand("sample-ri", "local window of the interlacement");
  ri->add_option("--u", u);
  ri->add_option("--sbwd", sbwd);
  ri->add_option("--rstop", rstop);
  ri->add_option("--sfwd", sfwd);
  ri->add_flag("--dump", dump);

  auto* wu = app.add_subcommand("wusf", "interlacement Aldous-Broder forest");
  wu->add_option("--u", u);
  wu->add_option("--window", window);
  wu->add_option("--inner", inner);

  auto* cap = app.add_subcommand("capacity", "equilibrium measure / capacity");
  cap->add_option("--ksize", ksize, "1 = {o}, 2 = {o, neighbor}");
  cap->add_option("--tol", tol);
  cap->add_option("--scap", scap);

  auto* hk = app.add_subcommand("heatkernel", "return probability profile");
  hk->add_option("--nmax", nmax);

  auto* ma = app.add_subcommand("match", "soft-local-time matching diagnostics");
  ma->add_option("--alpha", alpha);
  ma->add_option("--L", L);
  ma->add_option("--window", window);
  ma->add_option("--inner", inner);
  ma->add_flag("--dump", dump);

  auto* co = app.add_subcommand("couple", "length-doubling coupling probes");
  co->add_option("--T", T);
  co->add_option("--v", v);
  co->add_option("--window", window);
  co->add_option("--matchradius", matchradius);

  auto* ca = app.add_subcommand("cascade", "dyadic doubling cascade");
  ca->add_option("--nmax", cnmax);
  ca->add_option("--window", window);

  auto* eq = app.add_subcommand("equivariance", "bit-exact translation test");
  eq->add_option("--shift", shift);
  eq->add_option("--T", T);
  eq->add_option("--window", window);

  auto* un = app.add_subcommand("unimod", "unimodularity diagnostics");
  un->add_option("--check", check, "mtp|tilted|drift|root|localtime");

  app.add_subcommand("selftest", "quick battery over the main components");

  std::vector<std::string> args(argv + 1, argv + argc);
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      std::ifstream in(args[i + 1]);
      if (!in) {
        std::cerr << "cannot open config " << args[i + 1] << "\n";
        return 1;
      }
      json cfg = json::parse(in);
      std::vector<std::string> injected;
      for (auto& [k, val] : cfg.items()) {
        injected.push_back("--" + k);
        if (!val.is_boolean()) injected.push_back(val.is_string() ? val.get<std::string>() : val.dump());
      }
      args.insert(args.begin(), injected.begin(), injected.end());
      break;
    }
  }
  std::vector<const char*> cargs{argv[0]};
  for (const auto& a : args) cargs.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (!out_path.empty()) {
    gl.file.open(out_path);
    gl.os = &gl.file;
  }

  try {
    if (fli->parsed()) return cmd_sample_fli(gl, v, T, window, labeled, dump);
    if (ri->parsed()) return cmd_sample_ri(gl, u, sbwd, rstop, sfwd, dump);
    if (wu->parsed()) return cmd_wusf(gl, u, window, inner);
    if (cap->parsed()) return cmd_capacity(gl, ksize, tol, scap);
    if (hk->parsed()) return cmd_heatkernel(gl, nmax);
    if (ma->parsed()) return cmd_match(gl, alpha, L, window, inner, dump);
    if (co->parsed()) return cmd_couple(gl, T, v, window, matchradius);
    if (ca->parsed()) return cmd_cascade(gl, cnmax, window);
    if (eq->parsed()) return cmd_equivariance(gl, shift, T, window);
    if (un->parsed()) return cmd_unimod(gl, check);
    return cmd_selftest(gl);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
