#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ckg/graph.hpp"

namespace ckg {

/// Equivalence edges between ci and cj whose endpoints both come from
/// `source`. Throws UnknownCourse / UnknownPair.
std::size_t count_equiv_edges(const KnowledgeGraph& g, std::string_view ci, std::string_view cj,
                              SourceKind source);

/// sim / n_i. Throws EmptyCourse when n_i is 0.
double source_correlation(std::size_t sim, std::size_t n_i);

/// (su + sv) / 2.
double overall_correlation(double su, double sv);

/// Node totals and equivalence counts of one course. A missing source total
/// means the course has no graph for that source.
struct CourseGraphStats {
  std::string course;
  std::optional<std::size_t> textbook_nodes;  // Nv
  std::optional<std::size_t> slide_nodes;     // Nu
  std::map<std::string, std::size_t> textbook_equiv;  // sim_v to each other course
  std::map<std::string, std::size_t> slide_equiv;     // sim_u
};

struct CorrelationMatrix {
  std::vector<std::string> courses;
  std::vector<std::vector<std::optional<double>>> su;
  std::vector<std::vector<std::optional<double>>> sv;
  Eigen::MatrixXd s;  // diagonal is 0 and never reported
  /// True where S(i,j) was taken from fewer than two sources.
  std::vector<std::vector<bool>> single_source;

  std::size_t index_of(std::string_view course) const;  // throws UnknownCourse

  /// Wraps a precomputed overall matrix (no per-source data).
  static CorrelationMatrix from_overall(std::vector<std::string> courses, Eigen::MatrixXd s);
};

/// Fills Su, Sv, S for every ordered pair i != j. A source counts for (i,j)
/// only when both courses have a graph for it; S is the mean over the
/// sources that count.
CorrelationMatrix correlation_matrix(std::span<const CourseGraphStats> stats);

struct Relevance {
  std::string course;
  double degree = 0.0;
  bool weak = false;  // the whole row is zero
};

Relevance most_relevant(const CorrelationMatrix& matrix, std::string_view course);

enum class WeightMethod { RowSum, MinMax };

struct WeightMatrix {
  std::vector<std::string> courses;
  Eigen::MatrixXd w;
};

WeightMatrix normalize_weights(const CorrelationMatrix& matrix,
                               WeightMethod method = WeightMethod::RowSum);

struct WeightEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;

  bool operator==(const WeightEdge&) const = default;
};

/// Off-diagonal entries with W(i,j) >= tau, row-major order.
std::vector<WeightEdge> prune_weight_edges(const WeightMatrix& w, double tau = 0.25);

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
  bool converged = false;
  int sweeps = 0;
};

/// Cyclic Jacobi rotation solver for a symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm falls below `tolerance`.
EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& a, double tolerance = 1e-9,
                                   int max_sweeps = 100);

/// I - D^-1/2 A D^-1/2; rows of isolated vertices keep the identity.
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity);

struct SpectralResult {
  std::vector<std::string> courses;
  std::vector<int> labels;  // canonical: first occurrence order
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd eigenvalues;   // k smallest
  Eigen::MatrixXd eigenvectors;  // n x k
  bool converged = true;
  std::string note;

  std::map<std::string, int> assignment() const;
};

/// Spectral clustering on the affinity (S + S^T)/2 with zero diagonal.
/// Throws KTooLarge unless 2 <= k <= n.
SpectralResult spectral_cluster(const CorrelationMatrix& matrix, int k, std::uint64_t seed);

struct ConceptFrequency {
  std::string concept_name;
  std::size_t frequency = 0;

  bool operator==(const ConceptFrequency&) const = default;
};

/// Concept nodes by total frequency descending, name ascending. Nodes sharing
/// a match key are counted together.
std::vector<ConceptFrequency> frequency_ranking(const KnowledgeGraph& g, std::size_t top_n);

/// Match keys of concepts present in all three graphs, sorted. Throws
/// CourseMismatch unless the non-empty graphs cover the same course.
std::vector<std::string> core_concepts_intersection(const KnowledgeGraph& textbook,
                                                    const KnowledgeGraph& slide,
                                                    const KnowledgeGraph& syllabus);

}  // namespace ckg
