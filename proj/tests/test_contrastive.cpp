#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "scmppi/contrastive.hpp"
#include "scmppi/errors.hpp"
#include "scmppi/gradcheck.hpp"
#include "scmppi/rng.hpp"

using namespace scmppi;

namespace {

Tensor random_unit_rows(int m, int d, std::uint64_t seed) {
    Rng rng(seed);
    Tensor z = Tensor::zeros({m, d});
    for (int i = 0; i < m; ++i) {
        double norm_sq = 0.0;
        std::vector<double> row(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            row[j] = rng.gaussian();
            norm_sq += row[j] * row[j];
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (int j = 0; j < d; ++j) z.data[std::size_t(i) * d + j] = float(row[j] * inv);
    }
    return z;
}

// Direct-summation oracle in 64-bit, straight from the loss definition.
// keep_negative decides the denominator mask; positives are always kept.
double loss_oracle(const Tensor& z, const std::vector<std::vector<int>>& positives, double tau,
                   const std::function<bool(int, int)>& keep_negative) {
    const int m = z.shape[0], d = z.shape[1];
    auto dot = [&](int i, int j) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) {
            acc += double(z.data[std::size_t(i) * d + c]) * double(z.data[std::size_t(j) * d + c]);
        }
        return acc;
    };
    double loss = 0.0;
    for (int i = 0; i < m; ++i) {
        const auto& pos = positives[std::size_t(i)];
        if (pos.empty()) continue;
        std::vector<char> is_pos(std::size_t(m), 0);
        for (int p : pos) is_pos[std::size_t(p)] = 1;
        double denom = 0.0;
        for (int a = 0; a < m; ++a) {
            if (a == i) continue;
            if (!is_pos[std::size_t(a)] && !keep_negative(i, a)) continue;
            denom += std::exp(dot(i, a) / tau);
        }
        for (int p : pos) {
            loss -= (1.0 / double(pos.size())) * std::log(std::exp(dot(i, p) / tau) / denom);
        }
    }
    return loss;
}

std::vector<std::vector<int>> pairing_to_positives(const std::vector<int>& pairing) {
    std::vector<std::vector<int>> pos(pairing.size());
    for (std::size_t i = 0; i < pairing.size(); ++i) pos[i] = {pairing[i]};
    return pos;
}

constexpr auto keep_all = [](int, int) { return true; };

}  // namespace

TEST_CASE("cosine score on aligned, orthogonal, and antipodal vectors") {
    const std::vector<float> e1 = {1.0f, 0.0f, 0.0f};
    const std::vector<float> e2 = {0.0f, 1.0f, 0.0f};
    std::vector<float> neg = {-1.0f, 0.0f, 0.0f};
    CHECK(cosine_score(e1, e1) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(cosine_score(e1, e2) == doctest::Approx(0.0));
    CHECK(cosine_score(e1, neg) == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK_THROWS_AS(cosine_score(e1, {1.0f}), DataError);
}

TEST_CASE("simclr forced cases") {
    // Identical pair: the sole denominator term equals the numerator.
    Tensor z2({2, 3}, {1.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f});
    const auto l2 = simclr_loss(z2, {1, 0}, 0.5);
    CHECK(l2.value == doctest::Approx(0.0).epsilon(1e-12));

    // All rows identical: every logit equal, so the loss is tau-independent.
    Tensor z4 = Tensor::zeros({4, 3});
    for (int i = 0; i < 4; ++i) z4.data[std::size_t(i) * 3] = 1.0f;
    const auto la = simclr_loss(z4, {1, 0, 3, 2}, 0.3);
    const auto lb = simclr_loss(z4, {1, 0, 3, 2}, 0.6);
    CHECK(la.value == doctest::Approx(lb.value).epsilon(1e-12));
    CHECK(la.value == doctest::Approx(4.0 * std::log(3.0)).epsilon(1e-9));

    Tensor z1({1, 3}, {1.0f, 0.0f, 0.0f});
    CHECK_THROWS_AS(simclr_loss(z1, {0}, 0.5), DataError);
}

TEST_CASE("simclr matches the direct-summation oracle") {
    const Tensor z = random_unit_rows(4, 8, 21);
    const std::vector<int> pairing = {1, 0, 3, 2};
    const auto got = simclr_loss(z, pairing, 0.5);
    const double want = loss_oracle(z, pairing_to_positives(pairing), 0.5, keep_all);
    CHECK(got.value == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("supcon reduces to simclr for singleton positive sets") {
    const Tensor z = random_unit_rows(6, 8, 33);
    ContrastBatch batch;
    batch.z = z;
    batch.labels = {0, 0, 1, 1, 0, 1};  // not singletons; use explicit sets below
    const std::vector<int> pairing = {1, 0, 3, 2, 5, 4};
    ContrastBatch anchored;
    anchored.z = z;
    anchored.mode = ContrastMode::ProteinAnchor;
    anchored.positives = pairing_to_positives(pairing);
    const auto sup = supcon_loss(anchored, 0.2);
    const auto sim = simclr_loss(z, pairing, 0.2);
    CHECK(sup.value == doctest::Approx(sim.value).epsilon(1e-9));

    // Pair-label batch whose classes have exactly two members each behaves
    // the same way under the induced pairing.
    ContrastBatch two;
    two.z = random_unit_rows(4, 6, 41);
    two.labels = {0, 0, 1, 1};
    const auto sup2 = supcon_loss(two, 0.4);
    const auto sim2 = simclr_loss(two.z, {1, 0, 3, 2}, 0.4);
    CHECK(sup2.value == doctest::Approx(sim2.value).epsilon(1e-9));
}

TEST_CASE("supcon matches the oracle on a labeled batch") {
    ContrastBatch batch;
    batch.z = random_unit_rows(6, 8, 55);
    batch.labels = {1, 1, 1, 0, 0, 0};
    const auto got = supcon_loss(batch, 0.3);
    const auto positives = batch_positive_sets(batch);
    CHECK(got.value == doctest::Approx(loss_oracle(batch.z, positives, 0.3, keep_all)).epsilon(1e-9));
    CHECK(got.report.skipped_anchors == 0);
}

TEST_CASE("identical anchors with identical labels contribute identical gradients") {
    Tensor z = random_unit_rows(5, 6, 60);
    for (int c = 0; c < 6; ++c) z.data[std::size_t(1) * 6 + c] = z.data[std::size_t(0) * 6 + c];
    ContrastBatch batch;
    batch.z = z;
    batch.labels = {1, 1, 0, 0, 1};
    const auto got = supcon_loss(batch, 0.25);
    for (int c = 0; c < 6; ++c) {
        CHECK(got.dz[std::size_t(0) * 6 + c] ==
              doctest::Approx(got.dz[std::size_t(1) * 6 + c]).epsilon(1e-5));
    }
}

TEST_CASE("degenerate batches are rejected") {
    ContrastBatch batch;
    batch.z = random_unit_rows(2, 4, 70);
    batch.labels = {0, 1};
    CHECK_THROWS_AS(supcon_loss(batch, 0.3), DataError);
    CHECK_THROWS_AS(psup_loss(batch, 0.3, 0.7), DataError);
}

TEST_CASE("anchors without positives are skipped and counted, not fatal") {
    ContrastBatch batch;
    batch.z = random_unit_rows(4, 6, 75);
    batch.labels = {0, 0, 0, 1};  // the lone class-1 row has no positives
    const auto got = supcon_loss(batch, 0.3);
    CHECK(got.report.skipped_anchors == 1);

    // Its value equals the loss over the three anchored rows alone.
    const auto positives = batch_positive_sets(batch);
    CHECK(got.value == doctest::Approx(loss_oracle(batch.z, positives, 0.3, keep_all)).epsilon(1e-9));
}

TEST_CASE("psup with threshold 1.0 equals supcon on random batches") {
    for (int m : {4, 8, 32, 64}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ContrastBatch batch;
            batch.z = random_unit_rows(m, 16, 1000 + 31 * m + seed);
            batch.labels.resize(std::size_t(m));
            Rng rng(2000 + seed);
            for (auto& y : batch.labels) y = rng.below(2) == 1 ? 1 : 0;
            // Guarantee nonempty positive sets for both classes.
            batch.labels[0] = batch.labels[1] = 0;
            batch.labels[2] = batch.labels[3] = 1;
            const auto filtered = psup_loss(batch, 0.1, 1.0);
            const auto plain = supcon_loss(batch, 0.1);
            CHECK(filtered.value == doctest::Approx(plain.value).epsilon(1e-9));
            CHECK(filtered.report.discarded_negatives == 0);
        }
    }
}

TEST_CASE("psup filters an engineered high-cosine negative") {
    // 2-D unit vectors with known pairwise cosines. The negative at cosine
    // 0.9 from anchor 0 sits above the 0.7 threshold.
    const double theta = std::acos(0.9);
    Tensor z = Tensor::zeros({4, 2});
    auto set_row = [&](int row, double angle) {
        z.data[std::size_t(row) * 2] = float(std::cos(angle));
        z.data[std::size_t(row) * 2 + 1] = float(std::sin(angle));
    };
    set_row(0, 0.0);
    set_row(1, 2.2);
    set_row(2, theta);
    set_row(3, 3.14159265);
    ContrastBatch batch;
    batch.z = z;
    batch.labels = {1, 1, 0, 0};

    const auto got = psup_loss(batch, 0.2, 0.7);
    CHECK(got.report.discarded_per_anchor[0] == 1);
    CHECK(got.report.discarded_negatives >= 1);

    const auto positives = batch_positive_sets(batch);
    auto keep = [&](int i, int a) {
        return cosine_score({z.data[std::size_t(i) * 2], z.data[std::size_t(i) * 2 + 1]},
                            {z.data[std::size_t(a) * 2], z.data[std::size_t(a) * 2 + 1]}) <= 0.7;
    };
    CHECK(got.value == doctest::Approx(loss_oracle(z, positives, 0.2, keep)).epsilon(1e-9));
}

TEST_CASE("psup with threshold -1 keeps positives only") {
    ContrastBatch batch;
    batch.z = random_unit_rows(6, 8, 81);
    batch.labels = {1, 1, 0, 0, 1, 0};
    const auto got = psup_loss(batch, 0.15, -1.0);
    const auto positives = batch_positive_sets(batch);
    const double want =
        loss_oracle(batch.z, positives, 0.15, [](int, int) { return false; });
    CHECK(got.value == doctest::Approx(want).epsilon(1e-9));
    // Every cross-class candidate was discarded (cosines > -1).
    CHECK(got.report.discarded_negatives == 6 * 3);
}

TEST_CASE("lowering the threshold shrinks denominators, never raising the loss") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        ContrastBatch batch;
        batch.z = random_unit_rows(12, 8, 90 + seed);
        batch.labels.assign(12, 0);
        for (int i = 6; i < 12; ++i) batch.labels[std::size_t(i)] = 1;
        double prev_loss = 1e300;
        std::int64_t prev_discarded = -1;
        for (double thresh : {1.0, 0.7, 0.3, 0.0, -0.5, -1.0}) {
            const auto got = psup_loss(batch, 0.2, thresh);
            CHECK(got.value <= prev_loss + 1e-9);
            CHECK(got.report.discarded_negatives >= prev_discarded);
            prev_loss = got.value;
            prev_discarded = got.report.discarded_negatives;
        }
    }
}

TEST_CASE("losses are invariant under simultaneous row and label permutation") {
    ContrastBatch batch;
    batch.z = random_unit_rows(8, 6, 111);
    batch.labels = {1, 0, 1, 0, 1, 0, 1, 0};
    const auto base = psup_loss(batch, 0.2, 0.7);

    const std::vector<int> perm = {3, 1, 7, 0, 5, 2, 6, 4};
    ContrastBatch shuffled;
    shuffled.z = Tensor::zeros({8, 6});
    shuffled.labels.resize(8);
    for (int i = 0; i < 8; ++i) {
        shuffled.labels[std::size_t(i)] = batch.labels[std::size_t(perm[i])];
        for (int c = 0; c < 6; ++c) {
            shuffled.z.data[std::size_t(i) * 6 + c] = batch.z.data[std::size_t(perm[i]) * 6 + c];
        }
    }
    const auto moved = psup_loss(shuffled, 0.2, 0.7);
    CHECK(moved.value == doctest::Approx(base.value).epsilon(1e-9));
}

TEST_CASE("losses are nonnegative when every anchor keeps a negative") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        ContrastBatch batch;
        batch.z = random_unit_rows(10, 8, 130 + seed);
        batch.labels.assign(10, 0);
        for (int i = 5; i < 10; ++i) batch.labels[std::size_t(i)] = 1;
        CHECK(psup_loss(batch, 0.3, 1.0).value >= 0.0);
        CHECK(supcon_loss(batch, 0.3).value >= 0.0);
    }
}

TEST_CASE("gradients of all three losses pass the finite-difference check") {
    const int m = 6, d = 5;
    const Tensor z = random_unit_rows(m, d, 171);

    const std::vector<std::vector<int>> simclr_pos = pairing_to_positives({1, 0, 3, 2, 5, 4});
    const std::vector<std::vector<int>> supcon_pos =
        detail::positives_from_labels({1, 1, 0, 0, 1, 0});
    const ContrastConfig no_filter{0.2, 1.0, 1e-8};
    const ContrastConfig with_filter{0.2, 0.6, 1e-8};

    auto make_build = [](const std::vector<std::vector<int>>& positives, ContrastConfig cc) {
        return [positives, cc](auto& tape, auto leaf) {
            return psup_loss_node(tape, leaf, positives, cc, nullptr);
        };
    };
    CHECK(grad_check(make_build(simclr_pos, no_filter), z, 1e-4) < 1e-4);
    CHECK(grad_check(make_build(supcon_pos, no_filter), z, 1e-4) < 1e-4);
    CHECK(grad_check(make_build(supcon_pos, with_filter), z, 1e-4) < 1e-4);
}

TEST_CASE("pair-label batches insist on binary labels") {
    ContrastBatch batch;
    batch.z = random_unit_rows(4, 4, 200);
    batch.labels = {0, 2, 1, 1};
    CHECK_THROWS_AS(supcon_loss(batch, 0.2), DataError);
}
