#include "dfgeo/coords.hpp"

#include <set>

namespace dfgeo {

CoordSystem::CoordSystem(int m) : m_(m) {
    if (m < 1) throw ValidationError("coordinate system needs m >= 1");
    names_.reserve(dim());
    for (int i = 1; i <= m; ++i) names_.push_back("x" + std::to_string(i));
    for (int i = 1; i <= m; ++i) names_.push_back("xt" + std::to_string(i));
}

CoordSystem::CoordSystem(int m, std::vector<std::string> names) : m_(m), names_(std::move(names)) {
    if (m < 1) throw ValidationError("coordinate system needs m >= 1");
    if (names_.size() != dim()) throw ValidationError("coordinate system needs 2m labels");
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size()) throw ValidationError("coordinate labels must be unique");
}

std::optional<std::size_t> CoordSystem::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == label) return i;
    return std::nullopt;
}

} // namespace dfgeo
