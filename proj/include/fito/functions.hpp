#pragma once

#include <string>
#include <vector>

namespace fito {

// Catalogue of smooth scalar functions with analytic derivatives of any order:
// polynomials and exp(lambda x^2). A ScalarFunction may represent a derivative
// of its base (shift > 0), which is how integrands F' are derived from an
// Ito-formula function F.
class ScalarFunction {
public:
    enum class Kind { polynomial, expsq };

    static ScalarFunction polynomial(std::vector<double> coeffs);  // ascending powers
    static ScalarFunction expsq(double lambda);
    // "x2", "x3", "poly:c0,c1,...", "expsq:lambda"
    static ScalarFunction parse(const std::string& spec);

    double operator()(double x) const { return eval(0, x); }
    double eval(int order, double x) const;  // order-th derivative
    ScalarFunction derivative(int k = 1) const;

    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    int degree() const;  // polynomial degree after shifts; -1 for the zero polynomial
    bool is_zero() const;
    const std::string& name() const { return name_; }

private:
    Kind kind_ = Kind::polynomial;
    std::vector<double> coeffs_;
    std::vector<std::vector<double>> table_;  // derivative polynomials by order
    double lambda_ = 0.0;
    void build_table();
    int shift_ = 0;
    std::string name_;
};

}  // namespace fito
