#include <cstring>
#include <filesystem>

#include "doctest.h"

#include "heterograph/model.hpp"
#include "heterograph/rng.hpp"
#include "test_util.hpp"

using namespace heterograph;
using namespace heterograph::testutil;

namespace {

Graph path3_onehot() {
    Matrix x(3, 3);
    for (int i = 0; i < 3; ++i) x(i, i) = 1.0;
    return Graph::from_edge_list({{0, 1}, {1, 2}}, 3, {0, 1, 2}, std::move(x), 3);
}

VariantConfig bare_variant(int rounds, bool one_hop, bool two_hop, std::vector<int> jk) {
    VariantConfig v;
    v.name = "test";
    v.rounds = rounds;
    v.use_one_hop = one_hop;
    v.use_two_hop = two_hop;
    v.jk_keep = std::move(jk);
    v.dropout_rate = 0.0;
    v.embed_nonlinearity = Nonlinearity::Identity;
    return v;
}

ModelParams identity_params(std::int64_t dim, std::int64_t final_dim,
                            std::int32_t num_classes) {
    ModelParams p;
    p.w_embed = Matrix::identity(dim);
    p.w_class = Matrix(final_dim, num_classes);
    return p;
}

}  // namespace

TEST_CASE("classifier width follows the (2^{K+1}-1)p law") {
    VariantConfig h2gcn2 = variant_from_code("H2GCN2");
    ModelParams p2 = init_params(100, 64, 5, h2gcn2, 0);
    CHECK(p2.w_class.rows() == 448);  // (2^3 - 1) * 64

    VariantConfig h2gcn1 = variant_from_code("S0");
    CHECK(init_params(100, 64, 5, h2gcn1, 0).w_class.rows() == 192);  // (2^2 - 1) * 64

    VariantConfig mlp = variant_from_code("MLP");
    CHECK(init_params(100, 64, 5, mlp, 0).w_class.rows() == 64);

    CHECK(h2gcn2.round_dim(1, 64) == 128);
    CHECK(h2gcn2.round_dim(2, 64) == 256);
    CHECK(variant_from_code("K1").final_dim(64) == 64 + 256);
    CHECK(variant_from_code("NL").final_dim(64) == 3 * 64);
}

TEST_CASE("glorot init is seeded and bounded") {
    VariantConfig v = variant_from_code("S0");
    ModelParams a = init_params(10, 8, 3, v, 42);
    ModelParams b = init_params(10, 8, 3, v, 42);
    ModelParams c = init_params(10, 8, 3, v, 43);
    CHECK(std::memcmp(a.w_embed.data(), b.w_embed.data(),
                      a.w_embed.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.w_embed.data(), c.w_embed.data(),
                      a.w_embed.size() * sizeof(double)) != 0);
    const double bound = std::sqrt(6.0 / (10 + 8));
    CHECK(max_abs(a.w_embed) <= bound);
}

TEST_CASE("forward: single edge with identity embedding") {
    Matrix x(2, 2);
    x(0, 0) = 1.0;
    x(1, 1) = 1.0;
    Graph g = Graph::from_edge_list({{0, 1}}, 2, {0, 1}, std::move(x), 2);
    VariantConfig v = bare_variant(1, true, false, {0, 1});
    auto ops = build_operators(g, v);
    ModelParams params = identity_params(2, v.final_dim(2), 2);
    ForwardCache cache;
    forward(params, g, ops, v, Mode::Eval, 0, &cache);
    // normalized weight is 1, so round 1 swaps the one-hot rows
    CHECK(cache.reps[1](0, 0) == 0.0);
    CHECK(cache.reps[1](0, 1) == 1.0);
    CHECK(cache.reps[1](1, 0) == 1.0);
}

TEST_CASE("forward: triangle with only the empty 2-hop shell") {
    Matrix x = Matrix::identity(3);
    Graph g = Graph::from_edge_list({{0, 1}, {1, 2}, {0, 2}}, 3, {0, 1, 2}, std::move(x), 3);
    VariantConfig v = bare_variant(1, false, true, {0, 1});
    auto ops = build_operators(g, v);
    ModelParams params = identity_params(3, v.final_dim(3), 3);
    ForwardCache cache;
    forward(params, g, ops, v, Mode::Eval, 0, &cache);
    CHECK(max_abs(cache.reps[1]) == 0.0);
}

TEST_CASE("forward: path normalization weights") {
    Graph g = path3_onehot();
    VariantConfig v = bare_variant(1, true, false, {0, 1});
    auto ops = build_operators(g, v);
    ModelParams params = identity_params(3, v.final_dim(3), 3);
    ForwardCache cache;
    forward(params, g, ops, v, Mode::Eval, 0, &cache);
    const double w = 1.0 / std::sqrt(2.0);
    CHECK(cache.reps[1](1, 0) == doctest::Approx(w).epsilon(1e-12));
    CHECK(cache.reps[1](1, 1) == 0.0);
    CHECK(cache.reps[1](1, 2) == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("forward: merged variants mix the ego through self-loops") {
    Graph g = path3_onehot();
    VariantConfig ns1 = variant_from_code("NS1");
    ns1.dropout_rate = 0.0;
    ns1.embed_nonlinearity = Nonlinearity::Identity;
    auto ops = build_operators(g, ns1);
    REQUIRE(ops.size() == 1);
    // node 0 row of the self-loop operator touches itself and node 1
    ModelParams params = identity_params(3, ns1.final_dim(3), 3);
    ForwardCache cache;
    forward(params, g, ops, ns1, Mode::Eval, 0, &cache);
    CHECK(cache.reps[1](0, 0) > 0.0);  // own feature mixed in
    CHECK(cache.reps[1](0, 1) > 0.0);
    // final representation is the mixed round only (no unmixed ego block)
    CHECK(cache.final_concat.cols() == 3);
}

TEST_CASE("forward: isolated node keeps its ego information only") {
    Matrix x = Matrix::identity(4);
    Graph g = Graph::from_edge_list({{0, 1}, {1, 2}}, 4, {0, 1, 2, 0}, std::move(x), 3);
    VariantConfig v = bare_variant(1, true, true, {0, 1});
    auto ops = build_operators(g, v);
    ModelParams params = identity_params(4, v.final_dim(4), 3);
    ForwardCache cache;
    forward(params, g, ops, v, Mode::Eval, 0, &cache);
    for (std::size_t j = 0; j < cache.reps[1].cols(); ++j) CHECK(cache.reps[1](3, j) == 0.0);
    CHECK(cache.final_concat(3, 3) == 1.0);  // ego block survives
}

TEST_CASE("eval forward is bitwise deterministic; train dropout is seeded") {
    Graph g = make_er_graph(30, 0.15, 3, 77, 12);
    VariantConfig v = variant_from_code("H2GCN2");
    v.dropout_rate = 0.5;
    auto ops = build_operators(g, v);
    ModelParams params = init_params(12, 8, 3, v, 1);

    Matrix e1 = forward(params, g, ops, v, Mode::Eval, 123);
    Matrix e2 = forward(params, g, ops, v, Mode::Eval, 456);
    CHECK(std::memcmp(e1.data(), e2.data(), e1.size() * sizeof(double)) == 0);

    Matrix t1 = forward(params, g, ops, v, Mode::Train, 5);
    Matrix t2 = forward(params, g, ops, v, Mode::Train, 5);
    Matrix t3 = forward(params, g, ops, v, Mode::Train, 6);
    CHECK(std::memcmp(t1.data(), t2.data(), t1.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(t1.data(), t3.data(), t1.size() * sizeof(double)) != 0);
}

TEST_CASE("dimension law for cache shapes") {
    Graph g = make_er_graph(20, 0.2, 3, 3, 10);
    VariantConfig v = variant_from_code("H2GCN2");
    v.dropout_rate = 0.0;
    auto ops = build_operators(g, v);
    ModelParams params = init_params(10, 4, 3, v, 9);
    ForwardCache cache;
    forward(params, g, ops, v, Mode::Eval, 0, &cache);
    CHECK(cache.reps[0].cols() == 4);
    CHECK(cache.reps[1].cols() == 8);
    CHECK(cache.reps[2].cols() == 16);
    CHECK(cache.final_concat.cols() == 28);  // (2^3 - 1) * 4
}

TEST_CASE("loss closed forms") {
    std::vector<std::int32_t> labels = {2};
    std::vector<NodeId> mask = {0};
    ModelParams params;
    params.w_embed = Matrix(1, 1);
    params.w_class = Matrix(1, 1);

    Matrix uniform(1, 5);
    CHECK(loss(uniform, labels, mask, params, 0.0) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-12));

    Matrix sharp(1, 5);
    for (int j = 0; j < 5; ++j) sharp(0, j) = j == 2 ? 50.0 : 0.0;
    CHECK(loss(sharp, labels, mask, params, 0.0) < 1e-10);

    // lambda = 1 with all-ones 2x2 weight pair adds 8 to ln|Y|
    ModelParams ones;
    ones.w_embed = Matrix(2, 2, 1.0);
    ones.w_class = Matrix(2, 2, 1.0);
    Matrix zero2(1, 2);
    CHECK(loss(zero2, {0}, {0}, ones, 1.0) ==
          doctest::Approx(std::log(2.0) + 8.0).epsilon(1e-12));

    CHECK_THROWS_AS(loss(uniform, labels, {}, params, 0.0), std::invalid_argument);
}

TEST_CASE("predict argmax with smallest-index ties") {
    Matrix logits(2, 2);
    logits(0, 0) = 0.1;
    logits(0, 1) = 0.9;
    logits(1, 0) = 0.5;
    logits(1, 1) = 0.5;
    auto pred = predict(logits);
    CHECK(pred[0] == 1);
    CHECK(pred[1] == 0);

    // argmax(softmax(x)) == argmax(x)
    Rng rng(8);
    Matrix rows(50, 6);
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows.data()[i] = rng.uniform_range(-3.0, 3.0);
    auto direct = predict(rows);
    Matrix soft(50, 6);
    for (std::size_t i = 0; i < 50; ++i) {
        double m = rows(i, 0);
        for (int j = 1; j < 6; ++j) m = std::max(m, rows(i, j));
        double sum = 0;
        for (int j = 0; j < 6; ++j) sum += std::exp(rows(i, j) - m);
        for (int j = 0; j < 6; ++j) soft(i, j) = std::exp(rows(i, j) - m) / sum;
    }
    CHECK(predict(soft) == direct);
}

TEST_CASE("operator/variant mismatch is rejected") {
    Graph g = make_er_graph(10, 0.3, 2, 1, 4);
    VariantConfig v = variant_from_code("S0");
    auto ops = build_operators(g, v);
    ModelParams params = init_params(4, 4, 2, v, 0);
    ops.pop_back();
    CHECK_THROWS(forward(params, g, ops, v, Mode::Eval, 0));
    CHECK_THROWS(variant_from_code("bogus"));
}

TEST_CASE("checkpoint round trip") {
    namespace fs = std::filesystem;
    VariantConfig v = variant_from_code("NL");
    ModelParams params = init_params(7, 5, 3, v, 21);
    const auto path = (fs::temp_directory_path() / "hg_ckpt.bin").string();
    save_params(path, params);
    ModelParams loaded = load_params(path);
    CHECK(max_abs_diff(loaded.w_embed, params.w_embed) == 0.0);
    CHECK(max_abs_diff(loaded.w_class, params.w_class) == 0.0);
    REQUIRE(loaded.w_round.size() == params.w_round.size());
    for (std::size_t k = 0; k < loaded.w_round.size(); ++k)
        CHECK(max_abs_diff(loaded.w_round[k], params.w_round[k]) == 0.0);
    fs::remove(path);
}

TEST_CASE("variant registry covers the ablation codes") {
    for (const auto& code : known_variant_codes()) CHECK_NOTHROW(variant_from_code(code));
    CHECK(variant_from_code("K2").jk_keep == variant_from_code("S0").jk_keep);
    CHECK(variant_from_code("N2").use_two_hop == false);
    CHECK(variant_from_code("NS0").separate_embeddings == false);
    CHECK(variant_from_code("MLP").rounds == 0);
    CHECK(variant_from_code("NL").nonlinear_rounds == true);
}
