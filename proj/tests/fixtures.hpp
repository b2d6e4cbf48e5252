#ifndef RELALG_TESTS_FIXTURES_HPP
#define RELALG_TESTS_FIXTURES_HPP

#include <relalg/algebroid.hpp>
#include <relalg/jets.hpp>

#include <string>

inline std::string fixture_path(const std::string& name) {
    return std::string(RELALG_FIXTURES) + "/" + name;
}

inline relalg::RelativeAlgebroid fixture_algebroid(const std::string& name) {
    return relalg::load_algebroid_file(fixture_path(name));
}

inline relalg::JetSystem fixture_pde(const std::string& name) {
    return relalg::load_pde_file(fixture_path(name));
}

#endif
