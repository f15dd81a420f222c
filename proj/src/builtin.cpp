#include "lawkit/builtin.hpp"

#include <stdexcept>

namespace lawkit {

namespace {

LawCoefficients paper_compute() {
    LawCoefficients c;
    c.E = 2.413;
    c.A = 798.6;
    c.alpha = 0.379;
    c.B = 4604.9;
    c.beta = 0.378;
    return c;
}

DataLawCoefficients paper_data() {
    DataLawCoefficients c;
    c.E = 0.0;
    c.A = 1535.23;
    c.alpha = 0.42;
    c.B = 54.21;
    c.beta = 0.13;
    c.c_p = 254.35;
    c.m_p = 0.39;
    c.k_p = 0.55;
    c.p_e = 1.49;
    c.gamma = 0.40;
    return c;
}

AltLawV1Coefficients paper_alt1() {
    AltLawV1Coefficients c;
    c.E = 0.0;
    c.A = 145962.2;
    c.alpha = 0.73;
    c.B = 61.1;
    c.beta = 0.13;
    c.mu = 58e-4;
    c.delta = 0.43;
    c.gamma_pen = 4.49;
    // published fit treats the repeat half-life as effectively unbounded,
    // i.e. D' ~ U_D * e; a large finite value keeps the type's invariants
    c.r_d_star = 1e9;
    return c;
}

AltLawV2Coefficients paper_alt2() {
    AltLawV2Coefficients c;
    c.E = 9.505e-66;
    c.A = 2.738;
    c.alpha = 1.240;
    c.B = 53.58;
    c.beta = 0.1207;
    c.mu = 0.1610;
    c.delta = 0.3073;
    c.gamma_pen = 0.8106;
    c.r_d_star = 33.62;
    c.kappa = 12642.0;
    c.eta = 1.486;
    c.tau = 26.56;
    return c;
}

FrontierFit paper_frontier() {
    FrontierFit f;
    f.n_frontier = {0.0216, 0.514, 0.0};
    f.d_frontier = {7.7, 0.486, 0.0};
    return f;
}

FrontierFit chinchilla_frontier() {
    FrontierFit f;
    f.n_frontier = {0.09, 0.50, 0.0};
    f.d_frontier = {1.88, 0.50, 0.0};
    return f;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {
        "paper-compute", "paper-data",     "paper-alt1",
        "paper-alt2",    "paper-frontier", "chinchilla"};
    return names;
}

BuiltinSet builtin_coefficients(const std::string& name) {
    BuiltinSet set;
    set.name = name;
    if (name == "paper-compute") {
        set.compute = paper_compute();
    } else if (name == "paper-data") {
        set.data = paper_data();
    } else if (name == "paper-alt1") {
        set.alt1 = paper_alt1();
    } else if (name == "paper-alt2") {
        set.alt2 = paper_alt2();
    } else if (name == "paper-frontier") {
        set.frontier = paper_frontier();
    } else if (name == "chinchilla") {
        set.frontier = chinchilla_frontier();
    } else {
        std::string available;
        for (const auto& n : builtin_names()) {
            if (!available.empty()) available += ", ";
            available += n;
        }
        throw std::invalid_argument("unknown coefficient set '" + name +
                                    "'; available: " + available);
    }
    return set;
}

}  // namespace lawkit
