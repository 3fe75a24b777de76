#include "dimest/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dimest {

Vector neighborhood_spectrum(const Matrix& nbhd) {
    const Eigen::Index m = nbhd.rows();
    const Eigen::Index D = nbhd.cols();
    if (m < 2) throw std::invalid_argument("neighborhood_spectrum: need at least 2 points");
    Matrix C = nbhd.rowwise() - nbhd.colwise().mean();
    Eigen::MatrixXd S;
    if (D <= m)
        S = (C.transpose() * C) / double(m - 1);
    else
        S = (C * C.transpose()) / double(m - 1); // Gram side, same nonzero spectrum
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    Vector ev = es.eigenvalues();
    const Eigen::Index L = std::min(m - 1, D);
    Vector out(L);
    for (Eigen::Index i = 0; i < L; ++i) out(i) = std::max(0.0, ev(ev.size() - 1 - i));
    return out;
}

ThresholdKind threshold_from_string(const std::string& s) {
    if (s == "fo") return ThresholdKind::FO;
    if (s == "fan") return ThresholdKind::Fan;
    if (s == "maxgap") return ThresholdKind::MaxGap;
    if (s == "ratio") return ThresholdKind::Ratio;
    if (s == "participation") return ThresholdKind::Participation;
    if (s == "kaiser") return ThresholdKind::Kaiser;
    if (s == "brokenstick") return ThresholdKind::BrokenStick;
    throw std::invalid_argument("unknown spectral threshold '" + s +
                                "' (fo|fan|maxgap|ratio|participation|kaiser|brokenstick)");
}

std::string threshold_to_string(ThresholdKind k) {
    switch (k) {
        case ThresholdKind::FO: return "fo";
        case ThresholdKind::Fan: return "fan";
        case ThresholdKind::MaxGap: return "maxgap";
        case ThresholdKind::Ratio: return "ratio";
        case ThresholdKind::Participation: return "participation";
        case ThresholdKind::Kaiser: return "kaiser";
        default: return "brokenstick";
    }
}

namespace {

int rank_of(const Vector& l) {
    int r = 0;
    while (r < l.size() && l(r) > 0.0) ++r;
    return r;
}

int dim_fo(const Vector& l, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("FO threshold: alpha must be in (0,1)");
    if (l(0) <= 0.0) return 0;
    int u = 0;
    for (int i = 0; i < l.size(); ++i)
        if (l(i) > alpha * l(0)) u = i + 1;
    return u;
}

int dim_fan(const Vector& l, double beta, double P) {
    if (!(beta > 1.0)) throw std::invalid_argument("Fan threshold: gap_threshold must exceed 1");
    if (!(P > 0.0 && P < 1.0)) throw std::invalid_argument("Fan threshold: cumulative_fraction must be in (0,1)");
    const int r = rank_of(l);
    if (r == 0) return 0;
    int gap = r;
    for (int u = 0; u + 1 < r; ++u)
        if (l(u) / l(u + 1) < beta) {
            gap = u + 1;
            break;
        }
    double total = l.sum(), run = 0.0;
    int cum = r;
    for (int u = 0; u < l.size(); ++u) {
        run += l(u);
        if (run > P * total) {
            cum = u + 1;
            break;
        }
    }
    return std::min(gap, cum);
}

int dim_maxgap(const Vector& l) {
    const int r = rank_of(l);
    if (r < 2) return r;
    int best = 1;
    double bestval = -1.0;
    for (int u = 0; u + 1 < r; ++u) {
        double v = l(u) / l(u + 1);
        if (v > bestval) {
            bestval = v;
            best = u + 1;
        }
    }
    return best;
}

int dim_ratio(const Vector& l, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("Ratio threshold: gamma must be in (0,1)");
    double total = l.sum();
    if (total <= 0.0) return 0;
    double run = 0.0;
    for (int u = 0; u < l.size(); ++u) {
        run += l(u);
        if (run > gamma * total) return u + 1;
    }
    return static_cast<int>(l.size());
}

double participation(const Vector& l) {
    double s1 = l.sum();
    double s2 = l.squaredNorm();
    if (s2 <= 0.0) return 0.0;
    return s1 * s1 / s2;
}

int dim_kaiser(const Vector& l, double prop) {
    if (!(prop > 0.0)) throw std::invalid_argument("Kaiser threshold: prop must be positive");
    double m = l.mean();
    int c = 0;
    for (int u = 0; u < l.size(); ++u)
        if (l(u) > prop * m) ++c;
    return c;
}

int dim_broken_stick(const Vector& l) {
    double total = l.sum();
    if (total <= 0.0) return 0;
    const int m = static_cast<int>(l.size());
    // L_u = (1/m) sum_{i=u..m} 1/i, the expected u-th share of a randomly
    // broken unit stick
    int u = 0;
    double tail = 0.0;
    std::vector<double> L(m + 1, 0.0);
    for (int i = m; i >= 1; --i) {
        tail += 1.0 / i;
        L[i] = tail / m;
    }
    while (u < m && l(u) / total > L[u + 1]) ++u;
    return u;
}

} // namespace

int threshold_dimension(const Vector& lambda, const ThresholdSpec& spec) {
    if (lambda.size() == 0) throw std::invalid_argument("threshold_dimension: empty spectrum");
    if (spec.kind == ThresholdKind::Participation)
        return static_cast<int>(std::lround(participation(lambda)));
    return static_cast<int>(threshold_value(lambda, spec));
}

double threshold_value(const Vector& lambda, const ThresholdSpec& spec) {
    if (lambda.size() == 0) throw std::invalid_argument("threshold_value: empty spectrum");
    switch (spec.kind) {
        case ThresholdKind::FO: return dim_fo(lambda, spec.alpha);
        case ThresholdKind::Fan: return dim_fan(lambda, spec.gap_threshold, spec.cumulative_fraction);
        case ThresholdKind::MaxGap: return dim_maxgap(lambda);
        case ThresholdKind::Ratio: return dim_ratio(lambda, spec.gamma);
        case ThresholdKind::Participation: return participation(lambda);
        case ThresholdKind::Kaiser: return dim_kaiser(lambda, spec.kaiser_prop);
        case ThresholdKind::BrokenStick: return dim_broken_stick(lambda);
    }
    throw std::logic_error("threshold_value: unhandled kind");
}

} // namespace dimest
