#include <relalg/dform.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace relalg {

int sort_index_sign(std::vector<int>& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        for (std::size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
            std::swap(idx[j], idx[j - 1]);
            sign = -sign;
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

DForm::DForm(int frame_rank, int degree) : rank_(frame_rank), degree_(degree) {
    if (degree < 0 || degree > frame_rank)
        coeffs_.clear(); // forms of degree > n are identically zero
}

DForm DForm::scalar(int frame_rank, const Expr& f) {
    DForm d(frame_rank, 0);
    if (!f.is_zero_structural()) d.coeffs_[{}] = f;
    return d;
}

DForm DForm::theta(int frame_rank, int i) {
    if (i < 1 || i > frame_rank) throw StructureError("frame index out of range");
    DForm d(frame_rank, 1);
    d.coeffs_[{i}] = Expr::constant(1);
    return d;
}

static void check_index(const std::vector<int>& idx, int degree, int rank) {
    if (static_cast<int>(idx.size()) != degree)
        throw StructureError("multi-index length does not match form degree");
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 1 || idx[i] > rank) throw StructureError("frame index out of range");
        if (i > 0 && idx[i] <= idx[i - 1])
            throw StructureError("multi-index must be strictly increasing");
    }
}

Expr DForm::coefficient(const std::vector<int>& idx) const {
    check_index(idx, degree_, rank_);
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? Expr() : it->second;
}

void DForm::set_coefficient(const std::vector<int>& idx, const Expr& value) {
    check_index(idx, degree_, rank_);
    if (value.is_zero_structural())
        coeffs_.erase(idx);
    else
        coeffs_[idx] = value;
}

void DForm::add_term(const std::vector<int>& raw_idx, const Expr& value) {
    std::vector<int> idx = raw_idx;
    int sign = sort_index_sign(idx);
    if (sign == 0 || value.is_zero_structural()) return;
    check_index(idx, degree_, rank_);
    Expr v = sign < 0 ? -value : value;
    auto it = coeffs_.find(idx);
    if (it == coeffs_.end()) {
        coeffs_[idx] = v;
    } else {
        Expr s = it->second + v;
        if (s.is_zero_structural())
            coeffs_.erase(it);
        else
            it->second = s;
    }
}

DForm DForm::wedge(const DForm& other) const {
    if (rank_ != other.rank_) throw StructureError("frame-rank mismatch in wedge");
    DForm out(rank_, degree_ + other.degree_);
    if (degree_ + other.degree_ > rank_) return out;
    for (const auto& [ia, ca] : coeffs_) {
        for (const auto& [ib, cb] : other.coeffs_) {
            std::vector<int> idx = ia;
            idx.insert(idx.end(), ib.begin(), ib.end());
            out.add_term(idx, ca * cb);
        }
    }
    return out;
}

DForm DForm::operator+(const DForm& other) const {
    if (rank_ != other.rank_) throw StructureError("frame-rank mismatch in form addition");
    if (degree_ != other.degree_ && !is_zero() && !other.is_zero())
        throw StructureError("degree mismatch in form addition");
    DForm out = is_zero() && degree_ != other.degree_ ? DForm(rank_, other.degree_) : *this;
    for (const auto& [idx, c] : other.coeffs_) out.add_term(idx, c);
    return out;
}

DForm DForm::operator-(const DForm& other) const { return *this + (-other); }

DForm DForm::scaled(const Expr& f) const {
    DForm out(rank_, degree_);
    if (f.is_zero_structural()) return out;
    for (const auto& [idx, c] : coeffs_) {
        Expr v = c * f;
        if (!v.is_zero_structural()) out.coeffs_[idx] = v;
    }
    return out;
}

DForm DForm::operator-() const { return scaled(Expr::constant(-1)); }

bool DForm::operator==(const DForm& other) const {
    if (rank_ != other.rank_) return false;
    if (is_zero() && other.is_zero()) return true;
    return degree_ == other.degree_ && coeffs_ == other.coeffs_;
}

DForm DForm::map_coefficients(const std::function<Expr(const Expr&)>& f) const {
    DForm out(rank_, degree_);
    for (const auto& [idx, c] : coeffs_) {
        Expr v = f(c);
        if (!v.is_zero_structural()) out.coeffs_[idx] = v;
    }
    return out;
}

std::set<std::string> DForm::variables() const {
    std::set<std::string> out;
    for (const auto& [idx, c] : coeffs_) {
        auto vs = c.variables();
        out.insert(vs.begin(), vs.end());
    }
    return out;
}

std::string DForm::str(const std::vector<std::string>& frame_names) const {
    if (coeffs_.empty()) return "0";
    auto theta_name = [&](int i) {
        if (!frame_names.empty()) return frame_names[i - 1];
        return "theta" + std::to_string(i);
    };
    std::ostringstream os;
    bool first = true;
    for (const auto& [idx, c] : coeffs_) {
        // put the sign between terms, with the coefficient printed positive
        Expr coeff = c;
        std::string cs = coeff.str();
        bool negative = !cs.empty() && cs[0] == '-';
        if (negative) {
            Expr p = -coeff;
            std::string ps = p.str();
            if (!ps.empty() && ps[0] != '-') {
                coeff = p;
                cs = ps;
            } else {
                negative = false;
            }
        }
        if (first) {
            if (negative) os << "-";
            first = false;
        } else {
            os << (negative ? " - " : " + ");
        }
        std::string wedge_part;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i) wedge_part += " ^ ";
            wedge_part += theta_name(idx[i]);
        }
        if (idx.empty()) {
            os << cs;
            continue;
        }
        if (cs == "1") {
            os << wedge_part;
        } else {
            bool needs_parens = cs.find(" + ") != std::string::npos ||
                                cs.find(" - ") != std::string::npos;
            if (negative && cs.find(' ') != std::string::npos) needs_parens = true;
            os << (needs_parens ? "(" + cs + ")" : cs) << " * " << wedge_part;
        }
    }
    return os.str();
}

} // namespace relalg
