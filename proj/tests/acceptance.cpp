// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fleethealth/adasyn.hpp"
#include "fleethealth/fast_dbscan.hpp"
#include "fleethealth/health.hpp"
#include "fleethealth/metrics.hpp"
#include "fleethealth/pca.hpp"
#include "fleethealth/pipeline.hpp"
#include "fleethealth/synth.hpp"
#include "oracles.hpp"

using namespace fleethealth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  Outcome() { detail << std::setprecision(4); }

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " exception: " << e.what();
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name;
  const auto d = o.detail.str();
  if (!d.empty()) std::cout << " | " << d;
  std::cout << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using Euclid = EuclideanMetric<double>;

}  // namespace

int main() {
  std::cout << std::setprecision(4);

  criterion(1, "non-reproducibility disclosure", [](Outcome& o) {
    o.detail << "the headline AUCs (B-PCA-K 0.67/0.69/0.61/0.79) and 96.4% capture within 50% come from "
                "proprietary fleet data and are not reproduced; criteria 2-11 substitute property checks and "
                "directional checks on a synthetic fleet";
  });

  criterion(2, "fast DBSCAN matches exhaustive DBSCAN", [](Outcome& o) {
    std::mt19937_64 rng(2);
    const double factors[] = {1.0, 1.5, 2.0, 3.0, 5.0};
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 20 + rng() % 281;
      auto pts = oracle::blob_points(n, 5000 + static_cast<std::uint64_t>(trial), 2 + trial % 4);
      Euclid metric(pts);
      DbscanParams p;
      p.eps = 0.2 + 0.05 * static_cast<double>(rng() % 13);
      p.min_points = 2 + rng() % 7;
      p.n_factor = factors[trial % 5];
      p.seed = static_cast<std::uint64_t>(trial);
      auto fast = cluster(metric, p);
      auto slow = oracle::naive_dbscan(n, metric, p.eps, p.min_points, visiting_order(n, p.seed));
      if (fast.core != slow.core ||
          oracle::core_partition(fast.labels, fast.core) != oracle::core_partition(slow.labels, slow.core)) {
        ++mismatches;
      }
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " of 50 datasets differ");

    const std::size_t n = 10000;
    auto pts = oracle::blob_points(n, 10000, 20, 0.12, 0.02);
    ClusterStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    cluster(Euclid(pts), {0.08, 5, 3.0, 1}, &stats);
    const double secs = seconds_since(t0);
    const std::uint64_t naive = static_cast<std::uint64_t>(n) * n;
    o.require(stats.distance_calls < naive, "distance calls not below N^2");
    o.detail << (o.pass ? "" : "; ") << "50/50 datasets checked; 10k points: " << stats.distance_calls
             << " distance calls vs " << naive << " exhaustive, " << secs << " s";
  });

  criterion(3, "PCA eigen decomposition and reconstruction", [](Outcome& o) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst_residual = 0.0, worst_trace = 0.0, worst_recon = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index d = 2 + trial % 6;
      Eigen::MatrixXd x(60, d);
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng) * (1.0 + static_cast<double>(j)) + (j ? x(i, 0) : 0.0);
      auto z = standardize(x);
      Eigen::MatrixXd s = covariance(z.data);
      auto eig = eigen_symmetric(s);
      for (Eigen::Index k = 0; k < d; ++k) {
        worst_residual = std::max(worst_residual, (s * eig.vectors.col(k) - eig.values(k) * eig.vectors.col(k)).norm());
      }
      worst_trace = std::max(worst_trace, std::abs(eig.values.sum() - s.trace()));

      auto model = fit_pca(x, d);
      Eigen::MatrixXd scores = model.transform(x);
      Eigen::MatrixXd back = scores * model.components.transpose();
      for (Eigen::Index j = 0; j < d; ++j) back.col(j) = back.col(j) * model.stds(j);
      back.rowwise() += model.means.transpose();
      worst_recon = std::max(worst_recon, (back - x).cwiseAbs().maxCoeff());
    }
    o.require(worst_residual <= 1e-8, "eigen residual too large");
    o.require(worst_trace <= 1e-8, "eigenvalue sum differs from trace");
    o.require(worst_recon <= 1e-8, "full-rank reconstruction error too large");

    Eigen::Matrix2d rho;
    rho << 1.0, 0.95, 0.95, 1.0;
    auto e = eigen_symmetric(rho);
    o.require(std::abs(e.values(0) - 1.95) <= 1e-9 && std::abs(e.values(1) - 0.05) <= 1e-9,
              "rho=0.95 eigenvalues wrong");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ref(rho);
    o.require(std::abs(ref.eigenvalues()(1) - e.values(0)) <= 1e-9, "disagrees with reference solver");
    o.detail << (o.pass ? "" : "; ") << "residual " << worst_residual << ", trace " << worst_trace
             << ", reconstruction " << worst_recon << ", rho=0.95 -> (" << std::setprecision(12) << e.values(0)
             << ", " << e.values(1) << ")";
  });

  criterion(4, "AUC equals the pair statistic", [](Outcome& o) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> grid(0, 9);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng() % 199;
      std::vector<double> s;
      std::vector<int> y;
      for (std::size_t i = 0; i < n; ++i) {
        s.push_back(grid(rng) / 10.0);
        y.push_back(static_cast<int>(rng() % 3 == 0));
      }
      y[0] = 1;
      y[1] = 0;
      worst = std::max(worst, std::abs(roc_auc(s, y).auc - oracle::pair_auc(s, y)));
    }
    o.require(worst <= 1e-12, "difference above 1e-12");
    o.detail << (o.pass ? "" : "; ") << "100 tied fixtures, max difference " << worst;
  });

  criterion(5, "gain curve properties", [](Outcome& o) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 10 + rng() % 190;
      std::vector<double> s;
      std::vector<int> y;
      for (std::size_t i = 0; i < n; ++i) {
        s.push_back(std::round(u(rng) * 20.0) / 20.0);
        y.push_back(u(rng) < 0.2 ? 1 : 0);
      }
      y[0] = 1;
      y[1] = 0;
      auto g = gain_curve(s, y);
      for (std::size_t k = 1; k < g.points.size(); ++k) {
        if (g.points[k].gain < g.points[k - 1].gain) o.require(false, "gain decreases");
      }
      o.require(g.points.back().gain == 1.0 && capture_at(g, 1.0) == 1.0, "gain(1) != 1");
      double prev = 0.0;
      for (int i = 0; i <= 200; ++i) {
        const double v = capture_at(g, i / 200.0);
        if (v < prev) o.require(false, "capture_at not monotone");
        prev = v;
      }
    }
    // Perfect model: positives ranked first are all captured once their share is inspected.
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
      s.push_back(1.0 - i / 20.0);
      y.push_back(i < 4 ? 1 : 0);
    }
    auto perfect = gain_curve(s, y);
    o.require(capture_at(perfect, 0.2) == 1.0 && capture_at(perfect, 0.1) == 0.5, "perfect model not exact");
    std::reverse(y.begin(), y.end());
    o.require(capture_at(gain_curve(s, y), 0.8) == 0.0, "worst model not exact");
  });

  oracle::TempDir fleet_dir("acceptance_fleet");
  SynthConfig synth;
  synth.n_cars = 2000;
  synth.seed = 7;
  write_fleet(generate(synth), fleet_dir.path());

  auto base_config = [&](const fs::path& out) {
    PipelineConfig cfg;
    cfg.events = fleet_dir / "events.csv";
    cfg.cars = fleet_dir / "cars.csv";
    cfg.out_dir = out;
    return cfg;
  };

  oracle::TempDir headline("acceptance_headline");
  criterion(6, "end-to-end synthetic fleet, b-pca-k", [&](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = run_pipeline(base_config(headline.path()));
    const double secs = seconds_since(t0);
    o.detail << "AUC";
    for (const auto& c : r.components) {
      o.detail << " c" << c.component << "=" << c.auc;
    }
    o.detail << ", fleet capture@50% " << r.fleet_capture_50 << ", " << secs << " s";
    bool aucs = r.components.size() == 4;
    for (const auto& c : r.components) aucs = aucs && c.auc >= 0.8;
    if (!aucs || r.fleet_capture_50 < 0.9 || secs >= 60.0) o.detail << " | ";
    o.require(aucs, "some component AUC below 0.8");
    o.require(r.fleet_capture_50 >= 0.9, "fleet capture@50% below 0.9");
    o.require(secs < 60.0, "slower than 60 s");
  });

  criterion(7, "B-PCA-K within 0.02 of Without-PCA, 5 seeds", [&](Outcome& o) {
    std::ostringstream worst;
    double min_margin = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      oracle::TempDir a("acceptance_k"), b("acceptance_w");
      auto ck = base_config(a.path());
      ck.seed = seed;
      auto cw = base_config(b.path());
      cw.seed = seed;
      cw.variant = Variant::without_pca;
      auto rk = run_pipeline(ck);
      auto rw = run_pipeline(cw);
      for (std::size_t i = 0; i < rk.components.size(); ++i) {
        const double margin = rk.components[i].auc - rw.components[i].auc;
        min_margin = std::min(min_margin, margin);
        if (margin < -0.02) {
          o.require(false, "seed " + std::to_string(seed) + " c" + std::to_string(rk.components[i].component));
        }
      }
    }
    o.detail << (o.pass ? "" : "; ") << "smallest AUC(B-PCA-K) - AUC(Without-PCA) = " << min_margin;
  });

  criterion(8, "ADASYN balance and segment provenance", [](Outcome& o) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::Index n = 400;
    Eigen::MatrixXd x(n, 3);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = i % 10 == 0 ? 1 : 0;
      y[static_cast<std::size_t>(i)] = label;
      for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = g(rng) + (label ? 1.5 : 0.0) * static_cast<double>(j + 1);
    }
    auto r = adasyn(x, y, {1.0, 5, 11});
    const double pos = static_cast<double>(std::count(r.y.begin(), r.y.end(), 1));
    const double neg = static_cast<double>(std::count(r.y.begin(), r.y.end(), 0));
    const double ratio = pos / neg;
    o.require(ratio >= 0.9 && ratio <= 1.1, "minority/majority ratio outside [0.9, 1.1]");

    // Independent check: every synthetic row is a convex combination of two
    // original minority rows, found by search rather than from the origins.
    std::vector<Eigen::Index> minority;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y[static_cast<std::size_t>(i)] == 1) minority.push_back(i);
    }
    std::size_t off_segment = 0;
    for (Eigen::Index s = n; s < r.x.rows(); ++s) {
      const Eigen::RowVectorXd p = r.x.row(s);
      bool found = false;
      for (std::size_t a = 0; a < minority.size() && !found; ++a) {
        const Eigen::RowVectorXd xa = x.row(minority[a]);
        for (std::size_t b = 0; b < minority.size() && !found; ++b) {
          const Eigen::RowVectorXd dir = x.row(minority[b]) - xa;
          const double len2 = dir.squaredNorm();
          double lambda = len2 > 0 ? (p - xa).dot(dir) / len2 : 0.0;
          if (lambda < -1e-12 || lambda > 1 + 1e-12) continue;
          if ((xa + lambda * dir - p).norm() <= 1e-9) found = true;
        }
      }
      if (!found) ++off_segment;
    }
    o.require(off_segment == 0, std::to_string(off_segment) + " synthetic rows off every minority segment");
    o.detail << (o.pass ? "" : "; ") << "ratio " << ratio << ", " << (r.x.rows() - n) << " synthetic rows checked";
  });

  criterion(9, "health score", [](Outcome& o) {
    const Eigen::Vector4d w(0.4, 0.3, 0.2, 0.1);
    o.require(std::abs(health_score(w, Eigen::Vector4d(0.5, 0.2, 0.1, 0.0)) - 0.28) <= 1e-12, "example 1");
    o.require(std::abs(health_score(w, Eigen::Vector4d(1, 1, 1, 1)) - 1.0) <= 1e-12, "example 2");
    o.require(health_score(w, Eigen::Vector4d::Zero()) == 0.0, "example 3");

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::map<std::string, Eigen::VectorXd> fleet;
    for (int i = 0; i < 500; ++i) {
      Eigen::VectorXd p(4);
      for (Eigen::Index k = 0; k < 4; ++k) p(k) = u(rng);
      fleet["car" + std::to_string(i)] = p;
    }
    auto order = [&](const Eigen::VectorXd& raw) {
      std::vector<std::string> ids;
      for (const auto& row : score_fleet(ComponentWeights::normalized({1, 2, 3, 4}, raw), fleet).rows) {
        if (row.score < 0.0 || row.score > 1.0) o.require(false, "score outside [0, 1]");
        ids.push_back(row.railcar_id);
      }
      return ids;
    };
    const Eigen::Vector4d raw(3, 1, 4, 1);
    const auto base = order(raw);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) o.require(order(c * raw) == base, "ranking changed under rescaling");
  });

  criterion(10, "determinism", [&](Outcome& o) {
    oracle::TempDir again("acceptance_again");
    run_pipeline(base_config(again.path()));
    auto a = oracle::snapshot(headline.path());
    auto b = oracle::snapshot(again.path());
    o.require(!a.empty() && a == b, "outputs differ between identical runs");
    o.detail << (o.pass ? "" : "; ") << a.size() << " files byte-identical";
  });

  criterion(11, "leakage guards", [&](Outcome& o) {
    oracle::TempDir dir("acceptance_leak");
    const CutoffConfig cutoff;
    auto events = read_events(fleet_dir / "events.csv");
    std::vector<MaintenanceEvent> early;
    for (const auto& e : events) {
      if (e.date <= cutoff.cutoff) early.push_back(e);
    }
    csv::write(dir / "events.csv", events_table(early));
    auto full = base_config(dir / "full");
    auto trimmed = base_config(dir / "trimmed");
    trimmed.events = dir / "events.csv";
    trimmed.trips = fleet_dir / "trips.csv";
    auto comps = run_features(full);
    run_features(trimmed);
    for (ComponentId c : comps) {
      auto a = FeatureMatrix::read_csv(features_file(dir / "full", c));
      auto b = FeatureMatrix::read_csv(features_file(dir / "trimmed", c));
      a.clear_target();
      b.clear_target();
      std::ostringstream sa, sb;
      csv::write(sa, a.to_table());
      csv::write(sb, b.to_table());
      o.require(sa.str() == sb.str(), "features of c" + std::to_string(c) + " changed");
    }

    auto cfg = base_config(dir / "adasyn");
    cfg.variant = Variant::adasyn;
    run_pipeline(cfg);
    std::size_t synthetic = 0;
    for (ComponentId c : discover_components(cfg.out_dir)) {
      const auto problem = audit_provenance(cfg.out_dir, c);
      o.require(problem.empty(), "c" + std::to_string(c) + ": " + problem);
      for (const auto& row : csv::read(train_rows_file(cfg.out_dir, c)).rows) synthetic += row[0] == "synthetic";
    }
    o.require(synthetic > 0, "no synthetic rows to audit");
    o.detail << (o.pass ? "" : "; ") << (events.size() - early.size()) << " post-cutoff events removed, "
             << synthetic << " synthetic rows audited";
  });

  return failures == 0 ? 0 : 1;
}
