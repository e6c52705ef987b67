#include "superconc/covering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "superconc/errors.hpp"
#include "superconc/rng.hpp"
#include "superconc/stats.hpp"

namespace superconc {

namespace {

std::vector<std::vector<std::size_t>> memberships(const Covering& covering) {
    std::vector<std::vector<std::size_t>> member(covering.n);
    for (std::size_t b = 0; b < covering.blocks.size(); ++b)
        for (std::size_t i : covering.blocks[b]) {
            if (i >= covering.n) throw DomainError("covering block index outside {0, ..., n-1}");
            member[i].push_back(b);
        }
    return member;
}

bool share_block(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t x : a)
        for (std::size_t y : b)
            if (x == y) return true;
    return false;
}

void require_pipeline_hypotheses(const CovarianceModel& model) {
    const HypothesisReport h = check_hypotheses(model);
    if (!h.nonincreasing) {
        std::ostringstream os;
        os << "phi must be non-increasing; it increases at t=" << h.nonincreasing_witness.value_or(0.0);
        throw HypothesisError(os.str());
    }
    if (!h.phi1_lt_half) {
        std::ostringstream os;
        os << "phi(1) < 1/2 violated: phi(1) = " << h.phi1;
        throw HypothesisError(os.str());
    }
}

}  // namespace

std::string_view to_string(CoveringKind kind) {
    switch (kind) {
        case CoveringKind::sequence_blocks: return "sequence_blocks";
        case CoveringKind::field_net: return "field_net";
        case CoveringKind::singletons: return "singletons";
    }
    return "unknown";
}

std::string_view to_string(RhoSource source) {
    return source == RhoSource::analytic ? "analytic" : "monte_carlo";
}

std::string_view to_string(BoundPipeline pipeline) {
    switch (pipeline) {
        case BoundPipeline::sequence: return "sequence";
        case BoundPipeline::field: return "field";
        case BoundPipeline::correlated: return "correlated";
    }
    return "unknown";
}

std::size_t block_half_width(std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    const double p = std::pow(static_cast<double>(n), alpha);
    return static_cast<std::size_t>(std::floor(p * (1.0 + 1e-12)));
}

Covering build_sequence_covering(std::size_t n, double alpha) {
    const std::size_t m = block_half_width(n, alpha);
    if (m < 1) throw ConfigError("floor(n^alpha) must be at least 1; raise alpha");
    if (2 * m >= n) {
        std::ostringstream os;
        os << "covering is trivial: 2 floor(n^alpha) = " << 2 * m << " >= n = " << n << "; lower alpha";
        throw ConfigError(os.str());
    }
    Covering cov;
    cov.n = n;
    cov.multiplicity = 3;
    cov.kind = CoveringKind::sequence_blocks;
    // Block k (k >= 1) spans the one-based positions max(1, (k-1)m) .. min(n, (k+1)m).
    for (std::size_t k = 1;; ++k) {
        const std::size_t first = std::max<std::size_t>(1, (k - 1) * m);
        const std::size_t last = std::min(n, (k + 1) * m);
        std::vector<std::size_t> block;
        block.reserve(last - first + 1);
        for (std::size_t i = first; i <= last; ++i) block.push_back(i - 1);
        cov.blocks.push_back(std::move(block));
        if (last == n) break;
    }
    return cov;
}

Covering singleton_covering(std::size_t n, double r0) {
    Covering cov;
    cov.n = n;
    cov.r0 = r0;
    cov.multiplicity = 1;
    cov.kind = CoveringKind::singletons;
    cov.blocks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cov.blocks.push_back({i});
    return cov;
}

CoveringCheck verify_covering(const Covering& covering, const Eigen::MatrixXd& gram, double r0) {
    if (static_cast<std::size_t>(gram.rows()) != covering.n || gram.cols() != gram.rows())
        throw DomainError("gram dimension does not match the covering index range");
    CoveringCheck check;
    const auto member = memberships(covering);
    for (std::size_t i = 0; i < covering.n; ++i) {
        const int count = static_cast<int>(member[i].size());
        check.observed_multiplicity = std::max(check.observed_multiplicity, count);
        if (count == 0 && check.ok) {
            check.ok = false;
            check.violating_index = i;
            check.reason = "index " + std::to_string(i) + " is not covered";
        } else if (count > covering.multiplicity && check.ok) {
            check.ok = false;
            check.violating_index = i;
            check.reason = "index " + std::to_string(i) + " lies in " + std::to_string(count) +
                           " blocks, above the multiplicity bound " + std::to_string(covering.multiplicity);
        }
    }
    if (!check.ok) return check;
    const auto n = static_cast<Eigen::Index>(covering.n);
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            // r0 is positive in exact arithmetic (or an infimum over positive
            // values), so an exactly zero entry is never close, even when
            // phi(m) has underflowed to 0.
            if (gram(i, j) < r0 || !(gram(i, j) > 0.0)) continue;
            if (!share_block(member[static_cast<std::size_t>(i)], member[static_cast<std::size_t>(j)])) {
                check.ok = false;
                check.violating_pair = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
                std::ostringstream os;
                os << "pair (" << i << ", " << j << ") has covariance " << gram(i, j) << " >= r0 = " << r0
                   << " but shares no block";
                check.reason = os.str();
                return check;
            }
        }
    }
    return check;
}

RhoEstimate rho_monte_carlo(const Covering& covering, std::span<const std::size_t> argmax) {
    if (argmax.size() < kMinRhoSamples) {
        std::ostringstream os;
        os << "Monte Carlo rho needs at least " << kMinRhoSamples << " argmax draws, got " << argmax.size();
        throw DomainError(os.str());
    }
    const auto member = memberships(covering);
    std::vector<std::size_t> counts(covering.blocks.size(), 0);
    for (std::size_t i : argmax) {
        if (i >= covering.n) throw DomainError("argmax index outside the covering range");
        for (std::size_t b : member[i]) ++counts[b];
    }
    RhoEstimate est;
    est.source = RhoSource::monte_carlo;
    est.samples = argmax.size();
    const auto best = std::max_element(counts.begin(), counts.end());
    est.argmax_block = static_cast<std::size_t>(best - counts.begin());
    est.rho = static_cast<double>(*best) / static_cast<double>(argmax.size());
    est.standard_error = stats::binomial_se(est.rho, argmax.size());
    return est;
}

SudakovExponents sudakov_exponents(double phi1, double c_sud, double alpha) {
    SudakovExponents e;
    e.delta = 2.0 * (1.0 - phi1);
    e.epsilon = 0.5 * (c_sud * e.delta) * (c_sud * e.delta);
    e.eta = e.epsilon - alpha;
    return e;
}

RhoEstimate rho_analytic(double n, double eta) {
    if (!(eta > 0.0)) {
        std::ostringstream os;
        os << "analytic rho needs eta > 0, i.e. alpha < (c delta)^2 / 2; got eta = " << eta;
        throw ConstraintError(os.str());
    }
    RhoEstimate est;
    est.source = RhoSource::analytic;
    est.rho = std::min(1.0, 4.0 * std::pow(n, -eta));
    return est;
}

double bound_scale(double r0, double rho) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    if (rho >= 1.0) return std::numeric_limits<double>::infinity();
    return std::max(r0, 1.0 / std::log(1.0 / rho));
}

double display_scale(const CovarianceModel& model, double n, double alpha) {
    if (!(n > 1.0)) throw DomainError("display scale needs n > 1");
    return std::max(evaluate(model, std::pow(n, alpha)), 1.0 / std::log(n));
}

BoundReport sequence_bound(const CovarianceModel& model, std::size_t n, double alpha,
                           const SequenceBoundOptions& options) {
    require_pipeline_hypotheses(model);
    if (n < 2) throw DomainError("sequence bound needs n >= 2");

    BoundReport r;
    r.pipeline = BoundPipeline::sequence;
    r.n = n;
    r.alpha = alpha;
    r.c = options.c;
    const std::size_t m = block_half_width(n, alpha);
    r.m = m;
    const bool independent = model.kind == CovarianceKind::iid;
    const double phi1 = evaluate(model, 1.0);
    r.delta = 2.0 * (1.0 - phi1);
    r.K_display = display_scale(model, static_cast<double>(n), alpha);

    Covering cov;
    if (independent) {
        // No off-diagonal covariance: singletons satisfy the pair condition for
        // every r0 > 0, and r0 is reported as the infimum 0.
        cov = singleton_covering(n, 0.0);
        r.r0 = 0.0;
        r.notes.emplace_back("independent model: singleton covering, r0 taken as its infimum 0");
    } else {
        if (m < 1) throw ConfigError("floor(n^alpha) must be at least 1; raise alpha");
        cov = build_sequence_covering(n, alpha);
        r.r0 = evaluate(model, static_cast<double>(m));
        cov.r0 = r.r0;
    }
    r.covering_kind = cov.kind;
    r.blocks = cov.blocks.size();
    r.multiplicity = cov.multiplicity;

    const double c_sud = options.c_sud.value_or(kDefaultSudakovConstant);
    if (options.c_sud || options.rho_source == RhoSource::analytic) {
        r.c_sud = c_sud;
        if (independent) {
            r.rho_analytic = 1.0 / static_cast<double>(n);
        } else {
            const auto e = sudakov_exponents(phi1, c_sud, alpha);
            r.epsilon = e.epsilon;
            r.eta = e.eta;
            if (e.eta > 0.0) {
                r.rho_analytic = rho_analytic(static_cast<double>(n), e.eta).rho;
            } else {
                std::ostringstream os;
                os << "analytic route invalid: needs alpha < (c delta)^2 / 2 = " << e.epsilon;
                r.notes.push_back(os.str());
            }
        }
    }

    if (options.rho_source == RhoSource::analytic) {
        if (!r.rho_analytic) rho_analytic(static_cast<double>(n), r.eta.value_or(0.0));  // throws
        r.rho = *r.rho_analytic;
        r.rho_source = RhoSource::analytic;
        r.rho_se = 0.0;
    } else {
        const PathGenerator gen(model, GridGeometry::sequence(n), options.method, options.seed);
        const ExtremeSummary ex = simulate_extremes(gen, options.batch, 0, options.jobs);
        const RhoEstimate est = rho_monte_carlo(cov, ex.argmax);
        r.rho = est.rho;
        r.rho_se = est.standard_error;
        r.rho_source = RhoSource::monte_carlo;
    }
    r.K = bound_scale(r.r0, r.rho);
    r.usable = std::isfinite(r.K);
    if (!r.usable) r.notes.emplace_back("rho = 1: 1/log(1/rho) is infinite and the bound is unusable");
    return r;
}

double box_covering_number(std::span<const double> extent) {
    if (extent.empty()) throw DomainError("box needs at least one axis");
    double n = 1.0;
    for (double e : extent) {
        if (!(e > 0.0)) throw DomainError("box extent must be positive");
        n *= std::ceil(e / 2.0);
    }
    return n;
}

double field_scale(const CovarianceModel& model, double covering_number, double exponent) {
    if (!(covering_number > 1.0)) throw DomainError("field scale needs N(A) > 1");
    return std::max(evaluate(model, std::pow(covering_number, exponent)), 1.0 / std::log(covering_number));
}

std::vector<std::size_t> greedy_net(const PointSet& points, double s0) {
    std::vector<std::size_t> net;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        bool far = true;
        for (std::size_t j : net) {
            if ((points.row(i) - points.row(static_cast<Eigen::Index>(j))).norm() <= s0) {
                far = false;
                break;
            }
        }
        if (far) net.push_back(static_cast<std::size_t>(i));
    }
    return net;
}

NetCheck verify_net(const PointSet& points, std::span<const std::size_t> net, double s0) {
    NetCheck check;
    for (std::size_t a = 0; a < net.size(); ++a)
        for (std::size_t b = a + 1; b < net.size(); ++b) {
            const double d = (points.row(static_cast<Eigen::Index>(net[a])) -
                              points.row(static_cast<Eigen::Index>(net[b]))).norm();
            check.min_separation = std::min(check.min_separation, d);
            if (!(d > s0)) check.separated = false;
        }
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j : net)
            nearest = std::min(nearest, (points.row(i) - points.row(static_cast<Eigen::Index>(j))).norm());
        check.max_gap = std::max(check.max_gap, nearest);
        if (nearest > s0) check.maximal = false;
    }
    return check;
}

Covering net_covering(const PointSet& points, std::span<const std::size_t> net, double radius, double r0) {
    Covering cov;
    cov.n = static_cast<std::size_t>(points.rows());
    cov.r0 = r0;
    cov.kind = CoveringKind::field_net;
    std::vector<int> count(cov.n, 0);
    for (std::size_t centre : net) {
        std::vector<std::size_t> block;
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            if ((points.row(i) - points.row(static_cast<Eigen::Index>(centre))).norm() <= radius) {
                block.push_back(static_cast<std::size_t>(i));
                ++count[static_cast<std::size_t>(i)];
            }
        cov.blocks.push_back(std::move(block));
    }
    cov.multiplicity = count.empty() ? 1 : *std::max_element(count.begin(), count.end());
    return cov;
}

SupremumScaling estimate_supremum_scaling(const SampleBatch& batch, std::span<const double> extent,
                                          std::size_t scales) {
    const GridGeometry& g = batch.geometry;
    if (extent.size() != static_cast<std::size_t>(g.dim)) throw DomainError("extent needs one entry per axis");
    SupremumScaling out;
    std::vector<double> x, y;
    for (std::size_t j = 0; j < scales; ++j) {
        const double factor = std::ldexp(1.0, -static_cast<int>(j));
        std::vector<double> sub(extent.begin(), extent.end());
        std::array<std::size_t, 2> nodes{1, 1};
        bool enough = true;
        for (int k = 0; k < g.dim; ++k) {
            sub[static_cast<std::size_t>(k)] *= factor;
            nodes[static_cast<std::size_t>(k)] =
                std::min(g.points[static_cast<std::size_t>(k)],
                         static_cast<std::size_t>(std::floor(sub[static_cast<std::size_t>(k)] / g.spacing * (1.0 + 1e-12))) + 1);
            if (nodes[static_cast<std::size_t>(k)] < 2) enough = false;
        }
        const double cn = box_covering_number(sub);
        if (!enough || !(cn > 1.0)) break;
        stats::CompensatedSum total;
        for (std::size_t p = 0; p < batch.batch(); ++p) {
            const auto path = batch.path(p);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i0 = 0; i0 < nodes[0]; ++i0)
                for (std::size_t i1 = 0; i1 < nodes[1]; ++i1) {
                    const std::size_t idx = g.dim == 2 ? i0 * g.points[1] + i1 : i0;
                    best = std::max(best, path[idx]);
                }
            total.add(best);
        }
        const double mean_sup = total.value() / static_cast<double>(batch.batch());
        out.covering_numbers.push_back(cn);
        out.mean_suprema.push_back(mean_sup);
        x.push_back(std::sqrt(std::log(cn)));
        y.push_back(mean_sup);
    }
    if (x.size() < 2) throw DomainError("supremum scaling needs at least two dyadic scales with N(A) > 1");
    const auto fit = stats::linear_fit(x, y);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.r2 = fit.r2;
    out.c1 = std::numeric_limits<double>::infinity();
    out.c2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.c1 = std::min(out.c1, y[i] / x[i]);
        out.c2 = std::max(out.c2, y[i] / x[i]);
    }
    return out;
}

BoundReport field_bound(const CovarianceModel& model, int d, std::span<const double> extent,
                        const FieldBoundOptions& options) {
    const double cn = box_covering_number(extent);
    if (!(cn > 1.0)) throw DomainError("field bound needs N(A) > 1");
    require_pipeline_hypotheses(model);

    BoundReport r;
    r.pipeline = BoundPipeline::field;
    r.covering_number = cn;
    r.c = std::nullopt;

    const GridGeometry geometry = GridGeometry::box(d, extent, options.spacing);
    r.n = geometry.size();
    const PathGenerator gen(model, geometry, options.method, options.seed);
    SampleOptions so;
    so.jobs = options.jobs;
    const SampleBatch batch = sample_batch(gen, options.batch, so);

    if (options.c1c2) {
        r.c1 = options.c1c2->first;
        r.c2 = options.c1c2->second;
    } else {
        const auto scaling = estimate_supremum_scaling(batch, extent, options.scales);
        r.c1 = scaling.c1;
        r.c2 = scaling.c2;
        r.fit_slope = scaling.slope;
        if (scaling.covering_numbers.size() < 4) {
            r.notes.push_back("fewer than 4 dyadic scales with N(A) > 1 were available for the c1/c2 regression");
        }
    }
    if (!(*r.c1 > 0.0 && *r.c2 > 0.0)) throw DomainError("c1 and c2 must be positive");
    const double exponent = options.exponent_ratio.value_or(0.125 * (*r.c1 / *r.c2) * (*r.c1 / *r.c2));
    r.exponent = exponent;
    const double s0 = std::pow(cn, exponent);
    r.s0 = s0;
    if (!(s0 > 2.0)) r.notes.push_back("s0 <= 2: N(A) is too small for the net construction's regime");
    r.r0 = evaluate(model, s0);

    const PointSet pts = geometry.coordinates();
    const auto net = greedy_net(pts, s0);
    r.net_size = net.size();
    const Covering cov = net_covering(pts, net, 2.0 * s0, r.r0);
    r.covering_kind = cov.kind;
    r.blocks = cov.blocks.size();
    r.multiplicity = cov.multiplicity;

    if (batch.batch() >= kMinRhoSamples) {
        const auto ex = max_argmax(batch);
        const auto est = rho_monte_carlo(cov, ex.argmax);
        r.rho = est.rho;
        r.rho_se = est.standard_error;
        r.rho_source = RhoSource::monte_carlo;
    } else {
        r.rho = std::numeric_limits<double>::quiet_NaN();
        r.notes.push_back("rho not estimated: batch below the Monte Carlo minimum");
    }

    r.K = field_scale(model, cn, exponent);
    r.K_display = r.K;
    r.usable = std::isfinite(r.K);
    return r;
}

BoundReport correlated_bound(double epsilon, std::size_t n, const Eigen::MatrixXd* gram) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    if (n < 2) throw DomainError("correlated bound needs n >= 2");
    if (gram != nullptr) {
        if (static_cast<std::size_t>(gram->rows()) != n || gram->cols() != gram->rows())
            throw DomainError("gram dimension does not match n");
        for (Eigen::Index j = 1; j < gram->cols(); ++j)
            for (Eigen::Index i = 0; i < j; ++i)
                if ((*gram)(i, j) > epsilon) {
                    std::ostringstream os;
                    os << "off-diagonal covariance " << (*gram)(i, j) << " at (" << i << ", " << j
                       << ") exceeds epsilon = " << epsilon;
                    throw HypothesisError(os.str());
                }
    }
    BoundReport r;
    r.pipeline = BoundPipeline::correlated;
    r.n = n;
    r.covering_kind = CoveringKind::singletons;
    r.blocks = n;
    r.multiplicity = 1;
    r.r0 = epsilon;
    r.rho = std::numeric_limits<double>::quiet_NaN();
    r.rho_source = RhoSource::analytic;
    r.K = std::max(epsilon, 1.0 / std::log(static_cast<double>(n)));
    r.K_display = r.K;
    r.usable = true;
    r.notes.emplace_back("singleton covering; any r0 > epsilon satisfies the pair condition");
    return r;
}

int dot(const SignVector& a, const SignVector& b) {
    int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double default_sign_threshold(std::size_t n) { return std::cbrt(static_cast<double>(n) * static_cast<double>(n)); }

SignVectorResult find_sign_vectors(std::size_t n, std::size_t target, double threshold, std::uint64_t seed,
                                   std::size_t max_tries) {
    if (n == 0) throw DomainError("sign vectors need n >= 1");
    if (target < 2) throw DomainError("target count must be at least 2");
    SignVectorResult res;
    res.threshold = threshold;
    NormalStream bits(seed, 0);
    SignVector candidate(n);
    while (res.vectors.size() < target && res.tries < max_tries) {
        for (std::size_t i = 0; i < n; i += 64) {
            const std::uint64_t w = bits.next_u64();
            for (std::size_t b = 0; b < 64 && i + b < n; ++b) candidate[i + b] = ((w >> b) & 1u) ? 1 : -1;
        }
        ++res.tries;
        bool ok = true;
        for (const auto& v : res.vectors) {
            ++res.comparisons;
            if (std::abs(dot(candidate, v)) <= threshold)
                ++res.passed_comparisons;
            else
                ok = false;
        }
        if (ok) res.vectors.push_back(candidate);
    }
    res.saturated = res.vectors.size() < target;
    res.acceptance_rate = res.tries ? static_cast<double>(res.vectors.size()) / static_cast<double>(res.tries) : 0.0;
    res.pairwise_pass_rate =
        res.comparisons ? static_cast<double>(res.passed_comparisons) / static_cast<double>(res.comparisons) : 0.0;
    return res;
}

bool verify_sign_vectors(const std::vector<SignVector>& vectors, double threshold) {
    for (std::size_t a = 0; a < vectors.size(); ++a)
        for (std::size_t b = a + 1; b < vectors.size(); ++b)
            if (std::abs(dot(vectors[a], vectors[b])) > threshold) return false;
    return true;
}

double sign_pair_pass_probability(std::size_t n, double threshold) {
    const double dn = static_cast<double>(n);
    const double lgn = std::lgamma(dn + 1.0);
    stats::CompensatedSum p;
    for (std::size_t k = 0; k <= n; ++k) {
        const double dot_value = 2.0 * static_cast<double>(k) - dn;
        if (std::abs(dot_value) > threshold) continue;
        const double dk = static_cast<double>(k);
        p.add(std::exp(lgn - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) - dn * std::log(2.0)));
    }
    return p.value();
}

double tail_bound(double K, double c, double t) { return 6.0 * std::exp(-c * t / std::sqrt(K)); }

double gaussian_tail_bound(double t) { return 2.0 * std::exp(-0.5 * t * t); }

std::vector<double> tail_curve(double K, double c, std::span<const double> t_grid) {
    if (!(K > 0.0) || !(c > 0.0)) throw DomainError("tail curve needs K > 0 and c > 0");
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(tail_bound(K, c, t));
    return out;
}

std::vector<double> gaussian_tail_curve(std::span<const double> t_grid) {
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(gaussian_tail_bound(t));
    return out;
}

std::optional<Crossover> tail_crossover(double K, double c, double rel_tol) {
    if (!(K > 0.0) || !(c > 0.0)) throw DomainError("crossover needs K > 0 and c > 0");
    const double a = c / std::sqrt(K);
    const double log3 = std::log(3.0);
    auto gap = [&](double t) { return a * t - 0.5 * t * t - log3; };
    if (!(gap(a) > 0.0)) return std::nullopt;
    auto bisect = [&](double lo, double hi, bool rising) {
        while (hi - lo > rel_tol * 0.5 * (hi + lo)) {
            const double mid = 0.5 * (lo + hi);
            if ((gap(mid) > 0.0) == rising)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    return Crossover{bisect(0.0, a, true), bisect(a, 2.0 * a, false)};
}

}  // namespace superconc
