#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ckg/docmodel.hpp"
#include "ckg/extraction.hpp"
#include "ckg/graph.hpp"

namespace ckg::fixture {

std::filesystem::path corpus_dir();  // tests/fixtures/corpus
std::filesystem::path adapters_dir();  // tests/fixtures/adapters
std::string read_text(const std::filesystem::path& p);

/// Small vocabulary with near-duplicate spellings, so that exact and literal
/// matches both occur.
const std::vector<std::string>& vocabulary();
Gazetteer vocabulary_gazetteer(bool odd_text = false);

struct RandomCourse {
  std::string name;
  std::vector<std::string> documents;  // outline text per source
  std::vector<DocumentTree> trees;
  std::vector<KnowledgeGraph> graphs;  // textbook then slides
};

/// Two-source course (textbook + slides) of at most ~60 nodes each. With
/// `odd_text`, headings and descriptions carry quotes, backslashes and
/// non-Latin text.
RandomCourse random_course(std::uint64_t seed, const std::string& name, bool odd_text = false);

/// Self-fused and cross-course linked graph over two random courses.
KnowledgeGraph random_linked_graph(std::uint64_t seed);

std::size_t pick(std::mt19937_64& rng, std::size_t n);

}  // namespace ckg::fixture
