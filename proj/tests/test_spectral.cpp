#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "embspec/corpus.hpp"
#include "embspec/error.hpp"
#include "embspec/fitting.hpp"
#include "embspec/spectral.hpp"
#include "test_util.hpp"

using namespace embspec;
using embspec::testing::TempDir;

namespace {

// Direct O(N^2) summation in long double, independent of FFTW.
Eigen::MatrixXd naive_one_sided_power(const Eigen::MatrixXd& v) {
  const Eigen::Index n = v.rows();
  const Eigen::Index half = n / 2;
  Eigen::MatrixXd p(half, v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index k = 1; k <= half; ++k) {
      long double re = 0, im = 0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const long double w = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n) / n;
        re += v(t, j) * std::cos(w);
        im += v(t, j) * std::sin(w);
      }
      p(k - 1, j) = static_cast<double>((re * re + im * im) / n);
    }
  }
  return p;
}

double max_relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  // Relative to the largest bin of the same column so near-zero bins do not dominate.
  double worst = 0.0;
  for (Eigen::Index j = 0; j < want.cols(); ++j) {
    const double scale = std::max(want.col(j).cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (got.col(j) - want.col(j)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

std::vector<Eigen::VectorXd> synthetic_doc_means(int docs, Eigen::Index n, Eigen::Index d, double alpha,
                                                 std::uint64_t seed, const std::optional<ShuffleSpec>& shuffle = {}) {
  std::vector<Eigen::VectorXd> means;
  RealFft fft(n);
  for (int i = 0; i < docs; ++i) {
    StepSignal s = synth_power_law(n, d, alpha, seed + static_cast<std::uint64_t>(i));
    if (shuffle) s = shuffle_steps(s, *shuffle, "doc" + std::to_string(i));
    means.push_back(dimension_average(psd(s, fft)));
  }
  return means;
}

}  // namespace

TEST_CASE("psd basics") {
  SUBCASE("zero signal") {
    const PowerSpectrum p = psd(StepSignal{Eigen::MatrixXd::Zero(16, 3)});
    CHECK(p.bins() == 8);
    CHECK(p.power.isZero(0.0));
  }

  SUBCASE("single tone lands in one bin with power N/4") {
    const int n = 16, k0 = 4;
    Eigen::MatrixXd v(n, 1);
    for (int t = 0; t < n; ++t) v(t, 0) = std::cos(2.0 * std::numbers::pi * k0 * t / n);
    const PowerSpectrum p = psd(StepSignal{v});
    for (Eigen::Index k = 1; k <= 8; ++k) {
      if (k == k0)
        CHECK(p.power(k - 1, 0) == doctest::Approx(n / 4.0).epsilon(1e-12));
      else
        CHECK(std::abs(p.power(k - 1, 0)) <= 1e-9);
    }
  }

  SUBCASE("grid excludes DC and ends at Nyquist") {
    for (Eigen::Index n : {8, 9, 12, 1198}) {
      const Eigen::VectorXd f = normalized_frequencies(n);
      CHECK(f.size() == n / 2);
      CHECK(f(f.size() - 1) == 1.0);
      CHECK(f(0) > 0.0);
      for (Eigen::Index k = 1; k < f.size(); ++k) CHECK(f(k) > f(k - 1));
    }
  }

  SUBCASE("random N=12, d=3 matches direct summation") {
    const Eigen::MatrixXd v = Eigen::MatrixXd::Random(12, 3);
    CHECK(max_relative_error(psd(StepSignal{v}).power, naive_one_sided_power(v)) <= 1e-6);
  }

  SUBCASE("too short") { CHECK_THROWS_AS(psd(StepSignal{Eigen::MatrixXd::Ones(7, 2)}), ValidationError); }
}

TEST_CASE("psd properties over random signals") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(8 + rng() % 57);
    const auto d = static_cast<Eigen::Index>(1 + rng() % 8);
    Eigen::MatrixXd v(n, d);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = gauss(rng);
    const StepSignal sig{v};
    RealFft fft(n);

    const SpectrumTransform t = transform(sig, fft);
    const Eigen::VectorXd energy = t.two_sided_energy();
    const Eigen::VectorXd time_energy = v.colwise().squaredNorm().transpose();
    for (Eigen::Index j = 0; j < d; ++j) REQUIRE(std::abs(energy(j) - time_energy(j)) <= 1e-6 * time_energy(j));

    const PowerSpectrum p = one_sided_power(t);
    REQUIRE(max_relative_error(p.power, naive_one_sided_power(v)) <= 1e-6);

    const double c = 0.5 + static_cast<double>(rng() % 1000) / 100.0;
    const PowerSpectrum scaled = psd(StepSignal{c * v}, fft);
    for (Eigen::Index i = 0; i < p.power.size(); ++i) {
      const double want = c * c * p.power.data()[i];
      REQUIRE(std::abs(scaled.power.data()[i] - want) <= 1e-12 * std::max(want, p.power.maxCoeff() * 1e-3));
    }
  }
}

TEST_CASE("psd of a synthetic signal reproduces the prescribed power law") {
  for (double alpha : {-1.0, 0.0, 5.0 / 3.0, 2.5}) {
    const Eigen::Index n = 200, half = 100;
    const PowerSpectrum p = psd(synth_power_law(n, 4, alpha, 3));
    for (Eigen::Index j = 0; j < 4; ++j)
      for (Eigen::Index k = 1; k < half; ++k)
        REQUIRE(p.power(k - 1, j) == doctest::Approx(std::pow(static_cast<double>(k) / half, alpha)).epsilon(1e-10));
  }
}

TEST_CASE("dimension_average") {
  SUBCASE("d = 1 is the identity") {
    const Eigen::MatrixXd p = Eigen::MatrixXd::Random(10, 1).cwiseAbs();
    CHECK(dimension_average(p) == p.col(0));
  }
  SUBCASE("p and 3p average to 2p") {
    Eigen::MatrixXd p(5, 2);
    p.col(0) << 1, 2, 3, 4, 5;
    p.col(1) = 3 * p.col(0);
    CHECK(dimension_average(p) == 2 * p.col(0));
  }
  SUBCASE("matches a two-pass mean") {
    const Eigen::MatrixXd p = Eigen::MatrixXd::Random(40, 8).cwiseAbs();
    const Eigen::VectorXd got = dimension_average(p);
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
      long double sum = 0;
      for (Eigen::Index j = 0; j < 8; ++j) sum += p(k, j);
      const long double mean = sum / 8;
      long double corr = 0;
      for (Eigen::Index j = 0; j < 8; ++j) corr += p(k, j) - mean;
      const double want = static_cast<double>(mean + corr / 8);
      CHECK(std::abs(got(k) - want) <= 1e-12 * want);
    }
  }
}

TEST_CASE("normalize_spectra") {
  const Eigen::VectorXd f = normalized_frequencies(40);
  std::vector<Eigen::VectorXd> docs;
  for (int i = 0; i < 5; ++i) docs.push_back(Eigen::VectorXd::Random(20).cwiseAbs() + Eigen::VectorXd::Constant(20, 0.1));

  SUBCASE("single document equals its own normalized spectrum") {
    for (NormMode mode : {NormMode::Corpus, NormMode::PerDoc}) {
      const NormalizedSpectrum s = normalize_spectra(std::span(docs.data(), 1), f, mode);
      const Eigen::VectorXd want = docs[0] / rectangle_integral(docs[0]);
      CHECK((s.e_mean - want).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(s.e_std.isZero(0.0));
      CHECK(s.doc_count == 1);
    }
  }

  SUBCASE("a duplicated document has zero spread") {
    const std::vector<Eigen::VectorXd> twice = {docs[1], docs[1]};
    const NormalizedSpectrum one = normalize_spectra(std::span(docs.data() + 1, 1), f, NormMode::Corpus);
    const NormalizedSpectrum two = normalize_spectra(twice, f, NormMode::Corpus);
    CHECK(two.e_mean == one.e_mean);
    CHECK(two.e_std.isZero(0.0));
  }

  SUBCASE("unit integral in both modes") {
    for (NormMode mode : {NormMode::Corpus, NormMode::PerDoc})
      CHECK(std::abs(rectangle_integral(normalize_spectra(docs, f, mode).e_mean) - 1.0) <= 1e-9);
  }

  SUBCASE("corpus mode averages before normalizing, per-doc after") {
    Eigen::VectorXd a = Eigen::VectorXd::Ones(20), b = 3 * Eigen::VectorXd::Ones(20);
    b.head(10).setZero();
    const std::vector<Eigen::VectorXd> pair = {a, b};
    const NormalizedSpectrum c = normalize_spectra(pair, f, NormMode::Corpus);
    const NormalizedSpectrum p = normalize_spectra(pair, f, NormMode::PerDoc);
    // corpus: mean = (0.5, ..., 0.5, 2, ..., 2), sigma^2 = 1.25
    CHECK(c.variance == doctest::Approx(1.25));
    CHECK(c.e_mean(0) == doctest::Approx(0.4));
    CHECK(c.e_mean(19) == doctest::Approx(1.6));
    // per-doc: a -> 1, b -> (0, ..., 0, 2, ..., 2); mean = (0.5, ..., 1.5)
    CHECK(p.e_mean(0) == doctest::Approx(0.5));
    CHECK(p.e_mean(19) == doctest::Approx(1.5));
    CHECK(p.e_std(0) == doctest::Approx(0.5));
  }

  SUBCASE("scale invariance") {
    std::vector<Eigen::VectorXd> scaled;
    for (const auto& d : docs) scaled.push_back(3.7 * 3.7 * d);
    for (NormMode mode : {NormMode::Corpus, NormMode::PerDoc}) {
      const NormalizedSpectrum a = normalize_spectra(docs, f, mode);
      const NormalizedSpectrum b = normalize_spectra(scaled, f, mode);
      CHECK(((a.e_mean - b.e_mean).array().abs() / a.e_mean.array()).maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(normalize_spectra({}, f, NormMode::Corpus), EmptyGroupError);
    const std::vector<Eigen::VectorXd> zero = {Eigen::VectorXd::Zero(20)};
    CHECK_THROWS_AS(normalize_spectra(zero, f, NormMode::Corpus), FitDomainError);
    const std::vector<Eigen::VectorXd> wrong = {Eigen::VectorXd::Ones(19)};
    CHECK_THROWS_AS(normalize_spectra(wrong, f, NormMode::Corpus), GridMismatchError);
  }
}

TEST_CASE("synthetic corpus spectrum follows f^(5/3)") {
  const auto means = synthetic_doc_means(200, 1198, 64, 5.0 / 3.0, 1000);
  const NormalizedSpectrum s = normalize_spectra(means, normalized_frequencies(1198), NormMode::Corpus);
  CHECK(std::abs(rectangle_integral(s.e_mean) - 1.0) <= 1e-9);
  CHECK(s.doc_count == 200);
  const PowerLawFit fit = fit_power_law(s.f_norm, s.e_mean, FitWindow{});
  CHECK(std::abs(fit.alpha - 5.0 / 3.0) <= 0.05);
}

TEST_CASE("shuffling the step rows flattens the spectrum") {
  const auto means = synthetic_doc_means(100, 1198, 16, 5.0 / 3.0, 77, ShuffleSpec{7});
  const NormalizedSpectrum s = normalize_spectra(means, normalized_frequencies(1198), NormMode::Corpus);
  CHECK(std::abs(fit_power_law(s.f_norm, s.e_mean, FitWindow{}).alpha) < 0.1);
}

TEST_CASE("manifest-driven corpus accumulation") {
  TempDir dir("spectral");
  std::mt19937_64 rng(5);
  std::string lines;
  std::vector<EmbeddingSequence> seqs;
  for (int i = 0; i < 9; ++i) {
    EmbeddingSequence seq;
    seq.values = RowMatrix<float>::Random(33, 4);
    seq.meta = embspec::testing::meta_for("d" + std::to_string(i), i % 2);
    lines += embspec::testing::add_document(dir.path(), seq);
    seqs.push_back(seq);
  }
  embspec::testing::write_text(dir / "manifest.jsonl", lines);
  const Manifest manifest = load_manifest(dir / "manifest.jsonl");

  SUBCASE("matches in-memory computation, in manifest order") {
    const CorpusAccumulation acc = accumulate_corpus(manifest, all_documents);
    REQUIRE(acc.doc_count() == 9);
    CHECK(acc.signal_length == 32);
    for (int i = 0; i < 9; ++i) {
      CHECK(acc.doc_ids[static_cast<std::size_t>(i)] == "d" + std::to_string(i));
      const Eigen::VectorXd want = dimension_average(psd(step_signal(seqs[static_cast<std::size_t>(i)])));
      CHECK(acc.doc_means[static_cast<std::size_t>(i)] == want);
    }
  }

  SUBCASE("worker count does not change a single bit") {
    const CorpusAccumulation one = accumulate_corpus(manifest, all_documents, {.workers = 1});
    for (unsigned w : {2u, 3u, 8u}) {
      const CorpusAccumulation many = accumulate_corpus(manifest, all_documents, {.workers = w});
      CHECK(many.power_sum == one.power_sum);
      CHECK(many.doc_means == one.doc_means);
    }
  }

  SUBCASE("filter selects a subset") {
    const auto odd = [](const DocumentMeta& m) { return m.layer == LayerId::at(1); };
    CHECK(accumulate_corpus(manifest, odd).doc_count() == 4);
    const auto none = [](const DocumentMeta&) { return false; };
    CHECK_THROWS_AS(accumulate_corpus(manifest, none), EmptyGroupError);
  }

  SUBCASE("grid mismatch names the document") {
    EmbeddingSequence odd;
    odd.values = RowMatrix<float>::Random(40, 4);
    odd.meta = embspec::testing::meta_for("longer");
    Manifest m = manifest;
    m.entries.push_back({dir / "longer.eseq", odd.meta});
    embspec::testing::add_document(dir.path(), odd);
    try {
      accumulate_corpus(m, all_documents);
      FAIL("expected GridMismatchError");
    } catch (const GridMismatchError& e) {
      CHECK(std::string(e.what()).find("longer") != std::string::npos);
    }
    const CorpusAccumulation skipped = accumulate_corpus(m, all_documents, {.skip_bad = true});
    CHECK(skipped.doc_count() == 9);
    REQUIRE(skipped.skipped.size() == 1);
    CHECK(skipped.skipped[0].doc_id == "longer");
  }

  SUBCASE("missing file aborts unless skipping") {
    Manifest m = manifest;
    m.entries.insert(m.entries.begin() + 3, {dir / "nope.eseq", embspec::testing::meta_for("ghost")});
    CHECK_THROWS_WITH_AS(accumulate_corpus(m, all_documents), doctest::Contains("ghost"), Error);
    CHECK(accumulate_corpus(m, all_documents, {.workers = 4, .skip_bad = true}).skipped.size() == 1);
  }

  SUBCASE("scaling every embedding leaves the normalized spectrum unchanged") {
    std::vector<Eigen::VectorXd> base, scaled;
    for (const auto& s : seqs) {
      base.push_back(dimension_average(psd(step_signal(s.values.cast<double>().eval()))));
      scaled.push_back(dimension_average(psd(step_signal((3.7 * s.values.cast<double>()).eval()))));
    }
    const Eigen::VectorXd f = normalized_frequencies(32);
    const NormalizedSpectrum a = normalize_spectra(base, f, NormMode::Corpus);
    const NormalizedSpectrum b = normalize_spectra(scaled, f, NormMode::Corpus);
    CHECK(((a.e_mean - b.e_mean).array().abs() / a.e_mean.array()).maxCoeff() <= 1e-12);
  }
}
