#ifndef RELALG_DFORM_HPP
#define RELALG_DFORM_HPP

#include <relalg/expr.hpp>

#include <map>
#include <string>
#include <vector>

namespace relalg {

// Exterior form over the fixed frame theta^1..theta^n with Expr coefficients.
// Multi-indices are strictly increasing 1-based integer tuples; coefficients
// that simplify to zero are dropped, so `coeffs().empty()` means the zero form.
class DForm {
public:
    DForm() : rank_(0), degree_(0) {}
    DForm(int frame_rank, int degree);

    static DForm zero(int frame_rank, int degree) { return DForm(frame_rank, degree); }
    static DForm scalar(int frame_rank, const Expr& f);
    static DForm theta(int frame_rank, int i); // basis covector, 1-based

    int frame_rank() const { return rank_; }
    int degree() const { return degree_; }
    bool is_zero() const { return coeffs_.empty(); }

    const std::map<std::vector<int>, Expr>& coeffs() const { return coeffs_; }

    // The stored coefficient or 0; throws StructureError on a malformed index.
    Expr coefficient(const std::vector<int>& idx) const;
    void set_coefficient(const std::vector<int>& idx, const Expr& value);
    void add_term(const std::vector<int>& idx, const Expr& value); // unsorted idx ok, sign applied

    DForm wedge(const DForm& other) const;
    DForm operator+(const DForm& other) const;
    DForm operator-(const DForm& other) const;
    DForm scaled(const Expr& f) const;
    DForm operator-() const;
    bool operator==(const DForm& other) const;

    // Applies f to every coefficient (substitution, numeric specialization...).
    DForm map_coefficients(const std::function<Expr(const Expr&)>& f) const;

    std::set<std::string> variables() const;

    // Printing per the exterior interface: sum of `coef * theta_i ^ theta_j`
    // terms, wedge token `^`, indices ascending.
    std::string str(const std::vector<std::string>& frame_names = {}) const;

private:
    int rank_;
    int degree_;
    std::map<std::vector<int>, Expr> coeffs_;
};

// Sorts idx ascending in-place; returns the permutation sign (0 on repeats).
int sort_index_sign(std::vector<int>& idx);

// Parses a form expression such as "cos(phi) * theta1 + sin(phi) * theta2" or
// "K * theta1 ^ theta2". Scalars use the expression grammar; `^` wedges frame
// covectors. A pure scalar parses as a 0-form.
DForm parse_form(const std::string& text, const std::vector<std::string>& frame_names,
                 const VarTable& vars);

} // namespace relalg

#endif
