#include "ckg/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <tuple>

#include "ckg/error.hpp"
#include "ckg/text.hpp"

namespace ckg {

namespace {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
  bool converged = false;
};

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index row, const Eigen::MatrixXd& centers,
                        Eigen::Index c) {
  return (points.row(row) - centers.row(c)).squaredNorm();
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// k-means++ seeding followed by Lloyd iterations.
KMeansResult kmeans_once(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng, int max_iterations) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], squared_distance(points, i, centers, c - 1));
      total += nearest[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unit_uniform(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[static_cast<std::size_t>(i)];
        if (target < 0.0 && nearest[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    }
    centers.row(c) = points.row(pick);
  }

  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, centers, c);
        if (d < best_d) best = c, best_d = d;
      }
      if (result.labels[static_cast<std::size_t>(i)] != best) {
        result.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) {
      result.converged = true;
      break;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = result.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: restart it at the point farthest from its centre.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = squared_distance(points, i, centers, result.labels[static_cast<std::size_t>(i)]);
        if (d > far_d) far = i, far_d = d;
      }
      centers.row(c) = points.row(far);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    result.inertia += squared_distance(points, i, centers, result.labels[static_cast<std::size_t>(i)]);
  return result;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

std::set<std::string> concept_keys(const KnowledgeGraph& g) {
  std::set<std::string> out;
  for (const auto& [id, n] : g.nodes()) {
    if (is_concept(n)) out.insert(match_key(n.name));
  }
  return out;
}

}  // namespace

std::size_t count_equiv_edges(const KnowledgeGraph& g, std::string_view ci, std::string_view cj, SourceKind source) {
  if (ci == cj) throw Error(ErrorCode::UnknownPair, "course pair needs two different courses");
  for (std::string_view c : {ci, cj}) {
    if (!g.scope.courses.count(std::string(c)))
      throw Error(ErrorCode::UnknownCourse, "course '" + std::string(c) + "' is not in the graph");
  }
  std::size_t count = 0;
  for (const auto& [key, e] : g.edges()) {
    if (e.type != EdgeType::EquivalentTo) continue;
    const KnowledgeNode* a = g.find(e.from);
    const KnowledgeNode* b = g.find(e.to);
    if (a == nullptr || b == nullptr || a->source != source || b->source != source) continue;
    if ((a->course == ci && b->course == cj) || (a->course == cj && b->course == ci)) ++count;
  }
  return count;
}

double source_correlation(std::size_t sim, std::size_t n_i) {
  if (n_i == 0) throw Error(ErrorCode::EmptyCourse, "course has no nodes for this source");
  return static_cast<double>(sim) / static_cast<double>(n_i);
}

double overall_correlation(double su, double sv) { return (su + sv) / 2.0; }

std::size_t CorrelationMatrix::index_of(std::string_view course) const {
  const auto it = std::find(courses.begin(), courses.end(), course);
  if (it == courses.end()) throw Error(ErrorCode::UnknownCourse, "course '" + std::string(course) + "' unknown");
  return static_cast<std::size_t>(it - courses.begin());
}

CorrelationMatrix CorrelationMatrix::from_overall(std::vector<std::string> courses, Eigen::MatrixXd s) {
  CorrelationMatrix m;
  const std::size_t n = courses.size();
  if (s.rows() != static_cast<Eigen::Index>(n) || s.cols() != static_cast<Eigen::Index>(n))
    throw Error(ErrorCode::InvalidArgument, "matrix size does not match the course list");
  m.courses = std::move(courses);
  m.su.assign(n, std::vector<std::optional<double>>(n));
  m.sv.assign(n, std::vector<std::optional<double>>(n));
  m.single_source.assign(n, std::vector<bool>(n, false));
  m.s = std::move(s);
  m.s.diagonal().setZero();
  return m;
}

CorrelationMatrix correlation_matrix(std::span<const CourseGraphStats> stats) {
  const std::size_t n = stats.size();
  CorrelationMatrix m;
  for (const auto& st : stats) m.courses.push_back(st.course);
  m.su.assign(n, std::vector<std::optional<double>>(n));
  m.sv.assign(n, std::vector<std::optional<double>>(n));
  m.single_source.assign(n, std::vector<bool>(n, false));
  m.s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  auto sim = [](const std::map<std::string, std::size_t>& counts, const std::string& other) {
    const auto it = counts.find(other);
    return it == counts.end() ? std::size_t{0} : it->second;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = stats[i];
      const auto& b = stats[j];
      double sum = 0.0;
      int sources = 0;
      if (a.slide_nodes && b.slide_nodes) {
        m.su[i][j] = source_correlation(sim(a.slide_equiv, b.course), *a.slide_nodes);
        sum += *m.su[i][j];
        ++sources;
      }
      if (a.textbook_nodes && b.textbook_nodes) {
        m.sv[i][j] = source_correlation(sim(a.textbook_equiv, b.course), *a.textbook_nodes);
        sum += *m.sv[i][j];
        ++sources;
      }
      if (sources == 2) {
        m.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = overall_correlation(*m.su[i][j], *m.sv[i][j]);
      } else {
        m.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sources == 1 ? sum : 0.0;
        m.single_source[i][j] = true;
      }
    }
  }
  return m;
}

Relevance most_relevant(const CorrelationMatrix& matrix, std::string_view course) {
  if (matrix.courses.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two courses");
  const std::size_t i = matrix.index_of(course);
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < matrix.courses.size(); ++j) {
    if (j == i) continue;
    const double v = matrix.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (!best) {
      best = j;
      continue;
    }
    const double bv = matrix.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*best));
    if (v > bv || (v == bv && matrix.courses[j] < matrix.courses[*best])) best = j;
  }
  const double degree = matrix.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*best));
  return {matrix.courses[*best], degree, degree == 0.0};
}

WeightMatrix normalize_weights(const CorrelationMatrix& matrix, WeightMethod method) {
  const Eigen::Index n = matrix.s.rows();
  WeightMatrix w{matrix.courses, Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (method == WeightMethod::RowSum) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k != i) sum += matrix.s(i, k);
      }
      if (sum <= 0.0) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) w.w(i, j) = matrix.s(i, j) / sum;
      }
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i) continue;
        lo = std::min(lo, matrix.s(i, k));
        hi = std::max(hi, matrix.s(i, k));
      }
      if (n < 2) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        w.w(i, j) = hi > lo ? (matrix.s(i, j) - lo) / (hi - lo) : (hi > 0.0 ? 1.0 : 0.0);
      }
    }
  }
  return w;
}

std::vector<WeightEdge> prune_weight_edges(const WeightMatrix& w, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "prune threshold must lie in [0,1]");
  std::vector<WeightEdge> out;
  for (Eigen::Index i = 0; i < w.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.w.cols(); ++j) {
      const double v = w.w(i, j);
      if (i != j && v > 0.0 && v >= tau)
        out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), v});
    }
  }
  return out;
}

EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& input, double tolerance, int max_sweeps) {
  if (input.rows() != input.cols()) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = (input + input.transpose()) / 2.0;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  EigenDecomposition result;

  auto off_norm = [&] {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    if (off_norm() <= tolerance) {
      result.converged = true;
      result.sweeps = sweep;
      break;
    }
    if (sweep == max_sweeps) {
      result.sweeps = sweep;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  result.values.resize(n);
  result.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    result.values(k) = a(src, src);
    Eigen::VectorXd col = v.col(src);
    Eigen::Index pivot = 0;
    col.cwiseAbs().maxCoeff(&pivot);
    if (col(pivot) < 0.0) col = -col;
    result.vectors.col(k) = col;
  }
  return result;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity) {
  const Eigen::Index n = affinity.rows();
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) degree(i) += affinity(i, j);
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || degree(i) <= 0.0 || degree(j) <= 0.0) continue;
      l(i, j) = -affinity(i, j) / std::sqrt(degree(i) * degree(j));
    }
  }
  return l;
}

std::map<std::string, int> SpectralResult::assignment() const {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < courses.size(); ++i) out[courses[i]] = labels[i];
  return out;
}

SpectralResult spectral_cluster(const CorrelationMatrix& matrix, int k, std::uint64_t seed) {
  const auto n = static_cast<int>(matrix.courses.size());
  if (k < 2 || k > n)
    throw Error(ErrorCode::KTooLarge, "cluster count " + std::to_string(k) + " outside 2.." + std::to_string(n));

  Eigen::MatrixXd affinity = (matrix.s + matrix.s.transpose()) / 2.0;
  affinity.diagonal().setZero();
  SpectralResult result;
  result.courses = matrix.courses;
  result.laplacian = normalized_laplacian(affinity);
  const EigenDecomposition eig = symmetric_eigen(result.laplacian, 1e-9, 100);
  result.eigenvalues = eig.values.head(k);
  result.eigenvectors = eig.vectors.leftCols(k);
  result.converged = eig.converged;
  if (!eig.converged) result.note = "eigensolver hit the sweep cap";

  if (k == n) {
    result.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) result.labels[static_cast<std::size_t>(i)] = i;
    return result;
  }

  Eigen::MatrixXd embedding = result.eigenvectors;
  for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  std::mt19937_64 rng(seed);
  constexpr int kRestarts = 10;
  constexpr int kMaxIterations = 100;
  std::optional<KMeansResult> best;
  for (int r = 0; r < kRestarts; ++r) {
    KMeansResult run = kmeans_once(embedding, k, rng, kMaxIterations);
    if (!best || run.inertia < best->inertia - 1e-12) best = std::move(run);
  }
  result.labels = canonical_labels(best->labels);
  if (!best->converged) {
    result.converged = false;
    result.note += std::string(result.note.empty() ? "" : "; ") + "k-means hit the iteration cap";
  }
  return result;
}

std::vector<ConceptFrequency> frequency_ranking(const KnowledgeGraph& g, std::size_t top_n) {
  std::map<std::string, ConceptFrequency> by_key;
  for (const auto& [id, n] : g.nodes()) {
    if (!is_concept(n)) continue;
    auto [it, inserted] = by_key.try_emplace(match_key(n.name), ConceptFrequency{n.name, 0});
    if (n.name < it->second.concept_name) it->second.concept_name = n.name;
    it->second.frequency += total_frequency(n);
  }
  std::vector<ConceptFrequency> out;
  out.reserve(by_key.size());
  for (auto& [key, cf] : by_key) out.push_back(std::move(cf));
  std::sort(out.begin(), out.end(), [](const ConceptFrequency& a, const ConceptFrequency& b) {
    return std::tuple(b.frequency, a.concept_name) < std::tuple(a.frequency, b.concept_name);
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

std::vector<std::string> core_concepts_intersection(const KnowledgeGraph& textbook, const KnowledgeGraph& slide,
                                                    const KnowledgeGraph& syllabus) {
  std::optional<std::set<std::string>> courses;
  for (const KnowledgeGraph* g : {&textbook, &slide, &syllabus}) {
    if (g->nodes().empty()) continue;
    if (!courses) {
      courses = g->scope.courses;
    } else if (*courses != g->scope.courses) {
      throw Error(ErrorCode::CourseMismatch, "graphs belong to different courses");
    }
  }
  const std::set<std::string> a = concept_keys(textbook);
  const std::set<std::string> b = concept_keys(slide);
  const std::set<std::string> c = concept_keys(syllabus);
  std::vector<std::string> out;
  for (const auto& key : a) {
    if (b.count(key) && c.count(key)) out.push_back(key);
  }
  return out;
}

}  // namespace ckg
