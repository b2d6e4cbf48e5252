#ifndef RELALG_RATIONAL_HPP
#define RELALG_RATIONAL_HPP

#include <gmpxx.h>
#include <string>

namespace relalg {

// Exact rational scalar. mpq_class keeps num/den canonical (coprime, den > 0).
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rat& r) { return r.get_str(); }

inline double to_double(const Rat& r) { return r.get_d(); }

inline bool is_integer(const Rat& r) { return r.get_den() == 1; }

// Parses "12" or "-3/4". Returns false on malformed input.
inline bool parse_rat(const std::string& text, Rat& out) {
    if (text.empty()) return false;
    try {
        out = Rat(text);
    } catch (const std::invalid_argument&) {
        return false;
    }
    if (out.get_den() == 0) return false;
    out.canonicalize();
    return true;
}

} // namespace relalg

#endif
