#include "heterograph/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "heterograph/rng.hpp"

namespace heterograph {

void VariantConfig::validate() const {
    if (rounds < 0 || rounds > 2)
        throw std::invalid_argument("variant '" + name + "': rounds must be 0, 1 or 2");
    if (jk_keep.empty()) throw std::invalid_argument("variant '" + name + "': jk_keep empty");
    for (std::size_t i = 0; i < jk_keep.size(); ++i) {
        if (jk_keep[i] < 0 || jk_keep[i] > rounds)
            throw std::invalid_argument("variant '" + name + "': jk_keep index out of range");
        if (i > 0 && jk_keep[i] <= jk_keep[i - 1])
            throw std::invalid_argument("variant '" + name + "': jk_keep must be ascending");
    }
    if (rounds > 0 && num_hop_ops() == 0)
        throw std::invalid_argument("variant '" + name + "': rounds > 0 needs a neighborhood");
    if (rounds == 0 && !(jk_keep.size() == 1 && jk_keep[0] == 0))
        throw std::invalid_argument("variant '" + name + "': K=0 keeps only round 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::invalid_argument("variant '" + name + "': dropout_rate outside [0,1)");
}

std::int64_t VariantConfig::round_dim(int k, std::int64_t p) const {
    if (k == 0) return p;
    if (nonlinear_rounds) return p;  // each learned round maps back to width p
    std::int64_t d = p;
    for (int i = 0; i < k; ++i) d *= num_hop_ops();
    return d;
}

std::int64_t VariantConfig::final_dim(std::int64_t p) const {
    std::int64_t d = 0;
    for (int k : jk_keep) d += round_dim(k, p);
    return d;
}

VariantConfig variant_from_code(const std::string& code) {
    VariantConfig v;
    v.name = code;
    if (code == "MLP") {
        v.rounds = 0;
        v.use_one_hop = v.use_two_hop = false;
        v.jk_keep = {0};
    } else if (code == "S0" || code == "H2GCN1" || code == "K2") {
        v.rounds = 1;
        v.jk_keep = {0, 1};
    } else if (code == "H2GCN2") {
        v.rounds = 2;
        v.jk_keep = {0, 1, 2};
    } else if (code == "S1" || code == "N2") {
        v.rounds = 1;
        v.use_two_hop = false;
        v.jk_keep = {0, 1};
    } else if (code == "NS0") {
        v.rounds = 1;
        v.separate_embeddings = false;
        v.jk_keep = {1};
    } else if (code == "NS1") {
        v.rounds = 1;
        v.use_two_hop = false;
        v.separate_embeddings = false;
        v.jk_keep = {1};
    } else if (code == "N0") {
        v.rounds = 1;
        v.jk_keep = {1};
    } else if (code == "N1") {
        v.rounds = 1;
        v.use_one_hop = false;
        v.jk_keep = {0, 1};
    } else if (code == "K0") {
        v.rounds = 2;
        v.jk_keep = {1, 2};
    } else if (code == "K1") {
        v.rounds = 2;
        v.jk_keep = {0, 2};
    } else if (code == "R2") {
        v.rounds = 2;
        v.jk_keep = {2};
    } else if (code == "NL") {
        v.rounds = 2;
        v.jk_keep = {0, 1, 2};
        v.nonlinear_rounds = true;
    } else {
        throw std::invalid_argument("unknown variant code: " + code);
    }
    v.validate();
    return v;
}

const std::vector<std::string>& known_variant_codes() {
    static const std::vector<std::string> codes = {"MLP", "S0",  "H2GCN1", "H2GCN2", "S1",
                                                   "N2",  "NS0", "NS1",    "N0",     "N1",
                                                   "K0",  "K1",  "K2",     "R2",     "NL"};
    return codes;
}

std::vector<SparseOperator> build_operators(const Graph& g, const VariantConfig& variant) {
    variant.validate();
    std::vector<SparseOperator> ops;
    if (variant.rounds == 0) return ops;
    if (variant.use_one_hop) {
        SparseOperator one = exact_khop_adjacency(g, 1);
        if (!variant.separate_embeddings) one = with_self_loops(one);
        ops.push_back(sym_normalize(one));
    }
    if (variant.use_two_hop) {
        // exact distance-2 shell either way: merging self-loops into the
        // 1-hop operator already covers distances 0 and 1
        ops.push_back(sym_normalize(exact_khop_adjacency(g, 2)));
    }
    return ops;
}

ModelParams init_params(std::int64_t feature_dim, std::int64_t embed_dim,
                        std::int32_t num_classes, const VariantConfig& variant,
                        std::uint64_t seed) {
    variant.validate();
    if (embed_dim < 1) throw std::invalid_argument("init_params: embed_dim must be >= 1");
    Rng rng(seed);
    auto glorot = [&rng](std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (std::size_t i = 0; i < m.size(); ++i)
            m.data()[i] = rng.uniform_range(-bound, bound);
        return m;
    };
    ModelParams params;
    params.w_embed = glorot(static_cast<std::size_t>(feature_dim),
                            static_cast<std::size_t>(embed_dim));
    if (variant.nonlinear_rounds) {
        for (int k = 1; k <= variant.rounds; ++k) {
            const std::int64_t in_dim =
                (1 + variant.num_hop_ops()) * variant.round_dim(k - 1, embed_dim);
            params.w_round.push_back(glorot(static_cast<std::size_t>(in_dim),
                                            static_cast<std::size_t>(embed_dim)));
        }
    }
    params.w_class = glorot(static_cast<std::size_t>(variant.final_dim(embed_dim)),
                            static_cast<std::size_t>(num_classes));
    return params;
}

namespace {

template <typename T>
MatrixT<T> apply_relu(const MatrixT<T>& pre) {
    MatrixT<T> out = pre;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.data()[i] < T(0)) out.data()[i] = T(0);
    return out;
}

template <typename T>
MatrixT<T> forward_impl(const ModelParamsT<T>& params, const MatrixT<T>& features, NodeId n,
                        const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                        Mode mode, std::uint64_t seed, ForwardCacheT<T>* cache) {
    variant.validate();
    if (static_cast<int>(ops.size()) != (variant.rounds > 0 ? variant.num_hop_ops() : 0))
        throw std::invalid_argument("forward: operator set does not match the variant");
    for (const auto& op : ops)
        if (op.n != n) throw std::invalid_argument("forward: operator size mismatch");
    if (features.rows() != static_cast<std::size_t>(n))
        throw std::invalid_argument("forward: feature rows != node count");

    ForwardCacheT<T> local;
    ForwardCacheT<T>& c = cache ? *cache : local;
    c = ForwardCacheT<T>{};
    c.mode = mode;

    // S1: graph-agnostic feature embedding
    c.embed_pre = matmul(features, params.w_embed);
    c.reps.resize(static_cast<std::size_t>(variant.rounds) + 1);
    c.reps[0] = variant.embed_nonlinearity == Nonlinearity::ReLU ? apply_relu(c.embed_pre)
                                                                 : c.embed_pre;

    // S2: K rounds of hop-separated aggregation
    if (variant.nonlinear_rounds) {
        c.round_in.resize(static_cast<std::size_t>(variant.rounds) + 1);
        c.round_pre.resize(static_cast<std::size_t>(variant.rounds) + 1);
    }
    for (int k = 1; k <= variant.rounds; ++k) {
        std::vector<MatrixT<T>> blocks;
        blocks.reserve(ops.size());
        for (const auto& op : ops) blocks.push_back(spmm(op, c.reps[k - 1]));
        if (variant.nonlinear_rounds) {
            std::vector<const MatrixT<T>*> parts{&c.reps[k - 1]};
            for (const auto& b : blocks) parts.push_back(&b);
            c.round_in[k] = hstack(parts);
            c.round_pre[k] = matmul(c.round_in[k], params.w_round[k - 1]);
            c.reps[k] = apply_relu(c.round_pre[k]);
        } else if (blocks.size() == 1) {
            c.reps[k] = std::move(blocks[0]);
        } else {
            std::vector<const MatrixT<T>*> parts;
            for (const auto& b : blocks) parts.push_back(&b);
            c.reps[k] = hstack(parts);
        }
    }

    // S3: jumping-knowledge concatenation, dropout, linear classifier
    {
        std::vector<const MatrixT<T>*> parts;
        for (int k : variant.jk_keep) parts.push_back(&c.reps[k]);
        c.final_concat = parts.size() == 1 ? *parts[0] : hstack(parts);
    }
    if (mode == Mode::Train && variant.dropout_rate > 0.0) {
        Rng rng(seed);
        c.dropout_keep = 1.0 - variant.dropout_rate;
        c.dropout_mask.resize(c.final_concat.size());
        c.dropped = c.final_concat;
        const T scale = static_cast<T>(1.0 / c.dropout_keep);
        for (std::size_t i = 0; i < c.dropout_mask.size(); ++i) {
            c.dropout_mask[i] = rng.bernoulli(c.dropout_keep) ? 1 : 0;
            c.dropped.data()[i] = c.dropout_mask[i] ? c.dropped.data()[i] * scale : T(0);
        }
    } else {
        c.dropped = c.final_concat;
        c.dropout_keep = 1.0;
    }
    if (c.dropped.cols() != params.w_class.rows())
        throw std::invalid_argument("forward: classifier width mismatch (params/variant)");
    c.logits = matmul(c.dropped, params.w_class);
    return c.logits;
}

}  // namespace

Matrix forward(const ModelParams& params, const Graph& g,
               const std::vector<SparseOperator>& ops, const VariantConfig& variant,
               Mode mode, std::uint64_t seed, ForwardCache* cache) {
    return forward_impl<double>(params, g.features(), g.num_nodes(), ops, variant, mode, seed,
                                cache);
}

MatrixF forward(const ModelParamsF& params, const Graph& g,
                const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                Mode mode, std::uint64_t seed, ForwardCacheF* cache) {
    MatrixF features = convert_matrix<double, float>(g.features());
    return forward_impl<float>(params, features, g.num_nodes(), ops, variant, mode, seed,
                               cache);
}

ModelParamsF to_float32(const ModelParams& params) {
    ModelParamsF out;
    out.w_embed = convert_matrix<double, float>(params.w_embed);
    out.w_class = convert_matrix<double, float>(params.w_class);
    for (const auto& w : params.w_round) out.w_round.push_back(convert_matrix<double, float>(w));
    return out;
}

double loss(const Matrix& logits, const std::vector<std::int32_t>& labels,
            const std::vector<NodeId>& mask, const ModelParams& params, double lambda) {
    if (mask.empty()) throw std::invalid_argument("loss: empty mask");
    double total = 0;
    for (NodeId v : mask) {
        const double* row = logits.row(v);
        double m = row[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) m = std::max(m, row[j]);
        double sum = 0;
        for (std::size_t j = 0; j < logits.cols(); ++j) sum += std::exp(row[j] - m);
        total += m + std::log(sum) - row[labels[v]];
    }
    double out = total / static_cast<double>(mask.size());
    if (lambda != 0.0) {
        auto ssq = [](const Matrix& w) {
            double s = 0;
            for (std::size_t i = 0; i < w.size(); ++i) s += w.data()[i] * w.data()[i];
            return s;
        };
        double reg = ssq(params.w_embed) + ssq(params.w_class);
        for (const auto& w : params.w_round) reg += ssq(w);
        out += lambda * reg;
    }
    return out;
}

std::vector<std::int32_t> predict(const Matrix& logits) {
    std::vector<std::int32_t> out(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* row = logits.row(i);
        std::int32_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (row[j] > row[best]) best = static_cast<std::int32_t>(j);
        out[i] = best;
    }
    return out;
}

namespace {
constexpr char kCheckpointMagic[] = "HGPARAMS\x01";

void write_tensor(std::ofstream& out, const std::string& name, const Matrix& m) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
    const std::uint64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(name.data(), name_len);
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

std::pair<std::string, Matrix> read_tensor(std::ifstream& in, const std::string& path) {
    std::uint32_t name_len;
    if (!in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len)))
        throw std::runtime_error(path + ": truncated checkpoint");
    std::string name(name_len, '\0');
    std::uint64_t rows, cols;
    if (!in.read(name.data(), name_len) ||
        !in.read(reinterpret_cast<char*>(&rows), sizeof(rows)) ||
        !in.read(reinterpret_cast<char*>(&cols), sizeof(cols)))
        throw std::runtime_error(path + ": truncated checkpoint");
    Matrix m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(double))))
        throw std::runtime_error(path + ": truncated checkpoint");
    return {name, std::move(m)};
}
}  // namespace

void save_params(const std::string& path, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    const std::uint32_t count = 2 + static_cast<std::uint32_t>(params.w_round.size());
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    write_tensor(out, "w_embed", params.w_embed);
    for (std::size_t k = 0; k < params.w_round.size(); ++k)
        write_tensor(out, "w_round_" + std::to_string(k), params.w_round[k]);
    write_tensor(out, "w_class", params.w_class);
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing file: " + path);
    char magic[sizeof(kCheckpointMagic) - 1];
    if (!in.read(magic, sizeof(magic)) ||
        std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error(path + ": not a heterograph checkpoint");
    std::uint32_t count;
    if (!in.read(reinterpret_cast<char*>(&count), sizeof(count)))
        throw std::runtime_error(path + ": truncated checkpoint");
    ModelParams params;
    for (std::uint32_t i = 0; i < count; ++i) {
        auto [name, m] = read_tensor(in, path);
        if (name == "w_embed")
            params.w_embed = std::move(m);
        else if (name == "w_class")
            params.w_class = std::move(m);
        else if (name.rfind("w_round_", 0) == 0)
            params.w_round.push_back(std::move(m));
        else
            throw std::runtime_error(path + ": unknown tensor '" + name + "'");
    }
    return params;
}

}  // namespace heterograph
