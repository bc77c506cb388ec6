#include "fito/functions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fito {

namespace {

std::vector<double> poly_derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = k * c[k];
    return d;
}

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace

ScalarFunction ScalarFunction::polynomial(std::vector<double> coeffs) {
    ScalarFunction f;
    f.kind_ = Kind::polynomial;
    f.coeffs_ = coeffs.empty() ? std::vector<double>{0.0} : std::move(coeffs);
    std::ostringstream os;
    os.precision(17);
    os << "poly:";
    for (std::size_t k = 0; k < f.coeffs_.size(); ++k) os << (k ? "," : "") << f.coeffs_[k];
    f.name_ = os.str();
    f.build_table();
    return f;
}

ScalarFunction ScalarFunction::expsq(double lambda) {
    if (!std::isfinite(lambda)) throw std::invalid_argument("expsq: lambda must be finite");
    ScalarFunction f;
    f.kind_ = Kind::expsq;
    f.lambda_ = lambda;
    std::ostringstream os;
    os.precision(17);
    os << "expsq:" << lambda;
    f.name_ = os.str();
    f.build_table();
    return f;
}

ScalarFunction ScalarFunction::parse(const std::string& spec) {
    if (spec == "x2") {
        auto f = polynomial({0.0, 0.0, 1.0});
        f.name_ = "x2";
        return f;
    }
    if (spec == "x3") {
        auto f = polynomial({0.0, 0.0, 0.0, 1.0});
        f.name_ = "x3";
        return f;
    }
    auto parse_num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw std::invalid_argument("bad number in function spec: " + spec);
        return v;
    };
    if (spec.rfind("poly:", 0) == 0) {
        std::vector<double> c;
        std::stringstream ss(spec.substr(5));
        std::string tok;
        while (std::getline(ss, tok, ',')) c.push_back(parse_num(tok));
        if (c.empty()) throw std::invalid_argument("poly: needs coefficients");
        auto f = polynomial(c);
        f.name_ = spec;
        return f;
    }
    if (spec.rfind("expsq:", 0) == 0) {
        auto f = expsq(parse_num(spec.substr(6)));
        f.name_ = spec;
        return f;
    }
    throw std::invalid_argument("unknown function '" + spec + "' (expected x2, x3, poly:<c0,c1,..>, expsq:<lambda>)");
}

void ScalarFunction::build_table() {
    int kOrders = 12;
    table_.clear();
    if (kind_ == Kind::polynomial) {
        kOrders = std::max<int>(kOrders, static_cast<int>(coeffs_.size()) + 2);
        std::vector<double> c = coeffs_;
        for (int k = 0; k < kOrders; ++k) {
            table_.push_back(c);
            c = poly_derivative(c);
        }
        return;
    }
    // d^n/dx^n exp(lambda x^2) = P_n(x) exp(lambda x^2), P_{n+1} = P_n' + 2 lambda x P_n
    std::vector<double> p{1.0};
    for (int k = 0; k < kOrders; ++k) {
        table_.push_back(p);
        std::vector<double> next = poly_derivative(p);
        next.resize(p.size() + 1, 0.0);
        for (std::size_t m = 0; m < p.size(); ++m) next[m + 1] += 2.0 * lambda_ * p[m];
        p = std::move(next);
    }
}

double ScalarFunction::eval(int order, double x) const {
    const int n = order + shift_;
    if (n < 0 || n >= static_cast<int>(table_.size()))
        throw std::out_of_range("ScalarFunction: derivative order not supported");
    const double p = horner(table_[n], x);
    return kind_ == Kind::polynomial ? p : p * std::exp(lambda_ * x * x);
}

ScalarFunction ScalarFunction::derivative(int k) const {
    ScalarFunction f = *this;
    f.shift_ += k;
    f.name_ = name_ + std::string(k, '\'');
    return f;
}

int ScalarFunction::degree() const {
    if (kind_ != Kind::polynomial) return -1;
    int deg = static_cast<int>(coeffs_.size()) - 1;
    while (deg >= 0 && coeffs_[deg] == 0.0) --deg;
    if (deg < 0) return -1;
    return deg - shift_ >= 0 ? deg - shift_ : -1;
}

bool ScalarFunction::is_zero() const { return kind_ == Kind::polynomial && degree() < 0; }

}  // namespace fito
