#ifndef RELALG_JETNAMES_HPP
#define RELALG_JETNAMES_HPP

#include <optional>
#include <string>
#include <vector>

namespace relalg {

// Jet coordinate naming: `u`, `u_x`, `u_xy` with index letters sorted by the
// independent-variable order. `indices` are 0-based positions into `indep`.
inline std::string jet_coordinate_name(const std::string& dep, std::vector<int> indices,
                                       const std::vector<std::string>& indep) {
    if (indices.empty()) return dep;
    std::sort(indices.begin(), indices.end());
    std::string out = dep + "_";
    for (int i : indices) out += indep[i];
    return out;
}

// Greedy longest-match parse of a suffix as a sequence of independent names.
inline bool parse_index_suffix(const std::string& s, const std::vector<std::string>& indep,
                               std::vector<int>& out) {
    std::size_t pos = 0;
    out.clear();
    while (pos < s.size()) {
        int best = -1;
        std::size_t best_len = 0;
        for (std::size_t i = 0; i < indep.size(); ++i) {
            const std::string& name = indep[i];
            if (name.size() > best_len && s.compare(pos, name.size(), name) == 0) {
                best = static_cast<int>(i);
                best_len = name.size();
            }
        }
        if (best < 0) return false;
        out.push_back(best);
        pos += best_len;
    }
    return true;
}

// Splits `name` into (dependent name, index positions) when it matches the jet
// naming scheme for the given independent variables.
inline std::optional<std::pair<std::string, std::vector<int>>> parse_jet_coordinate(
    const std::string& name, const std::vector<std::string>& indep) {
    for (std::size_t cut = name.size(); cut > 0; --cut) {
        if (cut == name.size()) continue; // bare names carry no indices here
        if (name[cut] != '_') continue;
        std::string dep = name.substr(0, cut);
        std::vector<int> idx;
        if (!dep.empty() && parse_index_suffix(name.substr(cut + 1), indep, idx) && !idx.empty())
            return std::make_pair(dep, idx);
    }
    return std::nullopt;
}

} // namespace relalg

#endif
