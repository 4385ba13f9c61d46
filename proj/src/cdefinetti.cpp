#include "deflab/cdefinetti.hpp"

#include "deflab/combinatorics.hpp"

#include <cmath>
#include <random>
#include <string>

namespace deflab {

namespace {

Occupation type_of(const std::vector<int>& config, int K)
{
    Occupation t(K, 0);
    for (int x : config) {
        ++t[x];
    }
    return t;
}

double multinomial(const Occupation& t)
{
    int total = 0;
    double log_m = 0.0;
    for (int v : t) {
        total += v;
        log_m -= log_factorial(v);
    }
    return std::round(std::exp(log_m + log_factorial(total)));
}

// Every configuration of class i receives class_value[i], bit for bit.
std::vector<double> fill_from_class_values(int K, int N, const std::vector<double>& class_value)
{
    const std::size_t size = table_size(K, N);
    SymSector types(K, N);
    std::vector<double> probs(size);
    std::vector<int> config(N, 0);
    for (std::size_t flat = 0; flat < size; ++flat) {
        std::size_t rest = flat;
        for (int k = N - 1; k >= 0; --k) {
            config[k] = static_cast<int>(rest % K);
            rest /= K;
        }
        probs[flat] = class_value[types.index(type_of(config, K))];
    }
    return probs;
}

} // namespace

std::size_t table_size(int K, int N)
{
    if (K < 1 || N < 0) {
        throw DomainError("symmetric table needs K >= 1 and N >= 0");
    }
    std::size_t size = 1;
    for (int i = 0; i < N; ++i) {
        if (size > kTableCap / static_cast<std::size_t>(K)) {
            throw CapacityError("table K^N = " + std::to_string(K) + "^" + std::to_string(N)
                                + " exceeds the cap of " + std::to_string(kTableCap) + " entries");
        }
        size *= static_cast<std::size_t>(K);
    }
    return size;
}

SymMeasure::SymMeasure(int K, int N, std::vector<double> probs)
    : K_(K), N_(N), probs_(std::move(probs))
{
    const std::size_t size = table_size(K, N);
    if (probs_.size() != size) {
        throw DomainError("SymMeasure: expected " + std::to_string(size) + " entries, got "
                          + std::to_string(probs_.size()));
    }
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) {
            throw DomainError("SymMeasure: negative or NaN probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("SymMeasure: probabilities sum to " + std::to_string(total));
    }
    if (N_ >= 2) {
        std::mt19937_64 rng(0x5eedULL);
        for (int t = 0; t < 20; ++t) {
            const std::size_t flat = rng() % size;
            const int i = static_cast<int>(rng() % N_);
            const int j = static_cast<int>(rng() % N_);
            auto c = config(flat);
            std::swap(c[i], c[j]);
            if (probs_[flat_index(c)] != probs_[flat]) {
                throw DomainError("SymMeasure: table is not permutation-symmetric");
            }
        }
    }
}

std::size_t SymMeasure::flat_index(const std::vector<int>& config) const
{
    if (static_cast<int>(config.size()) != N_) {
        throw DomainError("SymMeasure: configuration has wrong length");
    }
    std::size_t flat = 0;
    for (int x : config) {
        if (x < 0 || x >= K_) {
            throw DomainError("SymMeasure: letter outside the alphabet");
        }
        flat = flat * K_ + x;
    }
    return flat;
}

std::vector<int> SymMeasure::config(std::size_t flat) const
{
    std::vector<int> c(N_);
    for (int k = N_ - 1; k >= 0; --k) {
        c[k] = static_cast<int>(flat % K_);
        flat /= K_;
    }
    return c;
}

std::vector<double> type_weights(const SymMeasure& mu)
{
    SymSector types(mu.alphabet(), mu.variables());
    std::vector<double> w(types.dim());
    std::vector<int> rep;
    for (std::size_t i = 0; i < types.dim(); ++i) {
        const auto& t = types.occupation(i);
        rep.clear();
        for (int p = 0; p < mu.alphabet(); ++p) {
            rep.insert(rep.end(), t[p], p);
        }
        w[i] = mu[mu.flat_index(rep)] * multinomial(t);
    }
    return w;
}

SymMeasure from_type_weights(int K, int N, const std::vector<double>& weights)
{
    SymSector types(K, N);
    if (weights.size() != types.dim()) {
        throw DomainError("from_type_weights: expected one weight per type class");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw DomainError("from_type_weights: negative weight");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw DomainError("from_type_weights: zero total mass");
    }
    std::vector<double> value(types.dim());
    for (std::size_t i = 0; i < types.dim(); ++i) {
        value[i] = weights[i] / total / multinomial(types.occupation(i));
    }
    return SymMeasure(K, N, fill_from_class_values(K, N, value));
}

SymMeasure random_sym_measure(int K, int N, std::uint64_t seed)
{
    SymSector types(K, N);
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(types.dim());
    for (auto& x : w) {
        x = expo(rng);
    }
    return from_type_weights(K, N, w);
}

SymMeasure product_measure(const RealVector& rho, int N)
{
    const int K = static_cast<int>(rho.size());
    if (std::abs(rho.sum() - 1.0) > 1e-12 || rho.minCoeff() < 0.0) {
        throw DomainError("product_measure: rho is not a probability vector");
    }
    SymSector types(K, N);
    std::vector<double> value(types.dim());
    for (std::size_t i = 0; i < types.dim(); ++i) {
        double v = 1.0;
        for (int p = 0; p < K; ++p) {
            v *= std::pow(rho(p), types.occupation(i)[p]);
        }
        value[i] = v;
    }
    std::vector<double> probs = fill_from_class_values(K, N, value);
    double total = 0.0;
    for (double p : probs) {
        total += p;
    }
    for (auto& v : value) {
        v /= total;
    }
    return SymMeasure(K, N, fill_from_class_values(K, N, value));
}

SymMeasure symmetrized_point(int K, const std::vector<int>& config)
{
    const int N = static_cast<int>(config.size());
    for (int x : config) {
        if (x < 0 || x >= K) {
            throw DomainError("symmetrized_point: letter outside the alphabet");
        }
    }
    SymSector types(K, N);
    std::vector<double> w(types.dim(), 0.0);
    w[types.index(type_of(config, K))] = 1.0;
    return from_type_weights(K, N, w);
}

SymMeasure marginal(const SymMeasure& mu, int n)
{
    const int K = mu.alphabet();
    const int N = mu.variables();
    if (n < 0 || n > N) {
        throw DomainError("marginal: order " + std::to_string(n) + " outside [0, " + std::to_string(N) + "]");
    }
    // first n letters of a uniform member of class T have type t with
    // probability prod_p binomial(T_p, t_p) / binomial(N, n)
    SymSector big(K, N);
    SymSector small(K, n);
    const auto W = type_weights(mu);
    const double log_norm = log_binomial(N, n);
    std::vector<double> w(small.dim(), 0.0);
    for (std::size_t i = 0; i < big.dim(); ++i) {
        if (W[i] == 0.0) {
            continue;
        }
        const auto& T = big.occupation(i);
        for (std::size_t a = 0; a < small.dim(); ++a) {
            const auto& t = small.occupation(a);
            double log_p = -log_norm;
            bool ok = true;
            for (int p = 0; p < K && ok; ++p) {
                ok = t[p] <= T[p];
                if (ok) {
                    log_p += log_binomial(T[p], t[p]);
                }
            }
            if (ok) {
                w[a] += W[i] * std::exp(log_p);
            }
        }
    }
    return from_type_weights(K, n, w);
}

EmpiricalMixing df_mixing(const SymMeasure& mu)
{
    const int K = mu.alphabet();
    const int N = mu.variables();
    if (N < 1) {
        throw DomainError("df_mixing: need at least one variable");
    }
    SymSector types(K, N);
    const auto W = type_weights(mu);
    EmpiricalMixing mixing;
    for (std::size_t i = 0; i < types.dim(); ++i) {
        if (W[i] == 0.0) {
            continue;
        }
        RealVector rho(K);
        for (int p = 0; p < K; ++p) {
            rho(p) = static_cast<double>(types.occupation(i)[p]) / N;
        }
        mixing.atoms.push_back({W[i], rho});
    }
    return mixing;
}

SymMeasure df_state(const SymMeasure& mu)
{
    const int K = mu.alphabet();
    const int N = mu.variables();
    SymSector types(K, N);
    const EmpiricalMixing mixing = df_mixing(mu);
    std::vector<double> w(types.dim(), 0.0);
    for (std::size_t s = 0; s < types.dim(); ++s) {
        const auto& S = types.occupation(s);
        const double m = multinomial(S);
        for (const auto& atom : mixing.atoms) {
            double v = atom.weight * m;
            for (int p = 0; p < K; ++p) {
                v *= std::pow(atom.probs(p), S[p]);
            }
            w[s] += v;
        }
    }
    return from_type_weights(K, N, w);
}

double tv_distance(const SymMeasure& a, const SymMeasure& b)
{
    if (a.alphabet() != b.alphabet() || a.variables() != b.variables()) {
        throw DomainError("tv_distance: tables have different shapes");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return s;
}

DfIdentityReport df_marginal_identities(const SymMeasure& mu)
{
    const int K = mu.alphabet();
    const int N = mu.variables();
    if (N < 2) {
        throw DomainError("df_marginal_identities: need N >= 2");
    }
    const SymMeasure df = df_state(mu);
    DfIdentityReport r;

    const SymMeasure m1 = marginal(mu, 1);
    const SymMeasure d1 = marginal(df, 1);
    for (int x = 0; x < K; ++x) {
        r.first_residual = std::max(r.first_residual, std::abs(d1[x] - m1[x]));
    }
    const SymMeasure m2 = marginal(mu, 2);
    const SymMeasure d2 = marginal(df, 2);
    for (int x = 0; x < K; ++x) {
        for (int y = 0; y < K; ++y) {
            const std::size_t i = static_cast<std::size_t>(x) * K + y;
            const double expected = (N - 1.0) / N * m2[i] + (x == y ? m1[x] / N : 0.0);
            r.second_residual = std::max(r.second_residual, std::abs(d2[i] - expected));
        }
    }
    r.min_remainder = 0.0;
    for (int n = 1; n <= N; ++n) {
        const SymMeasure mn = (n == N) ? mu : marginal(mu, n);
        const SymMeasure dn = (n == N) ? df : marginal(df, n);
        const double factor = falling_ratio(N, n);
        for (std::size_t i = 0; i < mn.size(); ++i) {
            r.min_remainder = std::min(r.min_remainder, dn[i] - factor * mn[i]);
        }
    }
    r.passed = r.first_residual <= 1e-12 && r.second_residual <= 1e-12 && r.min_remainder >= -1e-12;
    return r;
}

DfBoundRow df_bounds(const SymMeasure& mu, const SymMeasure& df, int n)
{
    const int N = mu.variables();
    const int K = mu.alphabet();
    DfBoundRow row;
    row.tv = tv_distance(marginal(mu, n), marginal(df, n));
    row.bound = 2.0 * n * (n - 1.0) / N;
    row.refined_bound = 2.0 / N * std::min(static_cast<double>(K) * n, static_cast<double>(n) * n);
    return row;
}

nlohmann::json to_json(const SymMeasure& mu)
{
    return {{"K", mu.alphabet()}, {"N", mu.variables()}, {"probs", mu.probs()}};
}

SymMeasure sym_measure_from_json(const nlohmann::json& j)
{
    return SymMeasure(j.at("K").get<int>(), j.at("N").get<int>(), j.at("probs").get<std::vector<double>>());
}

} // namespace deflab
