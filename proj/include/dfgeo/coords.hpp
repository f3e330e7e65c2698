#pragma once

#include "dfgeo/errors.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dfgeo {

// Distinguished chart of the 2m-dimensional double manifold. Variables are ordered
// x1..xm, xt1..xtm; frame fields d/dx^i come first, d/dxt_i second.
class CoordSystem {
public:
    explicit CoordSystem(int m);
    CoordSystem(int m, std::vector<std::string> names);

    int m() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(2 * m_); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::optional<std::size_t> index_of(const std::string& label) const;

    bool is_tilde(std::size_t i) const { return i >= static_cast<std::size_t>(m_); }
    // x^i <-> xt_i partner slot.
    std::size_t pair_index(std::size_t i) const {
        return is_tilde(i) ? i - static_cast<std::size_t>(m_) : i + static_cast<std::size_t>(m_);
    }

    std::string frame_name(std::size_t i) const { return "d/d" + name(i); }
    std::string coframe_name(std::size_t i) const { return "d" + name(i); }

    bool operator==(const CoordSystem& o) const { return m_ == o.m_ && names_ == o.names_; }

private:
    int m_;
    std::vector<std::string> names_;
};

using CoordPtr = std::shared_ptr<const CoordSystem>;

inline CoordPtr make_coords(int m) { return std::make_shared<CoordSystem>(m); }

inline void require_same(const CoordPtr& a, const CoordPtr& b) {
    if (a == b) return;
    if (!a || !b || !(*a == *b)) throw DimensionError("coordinate systems differ");
}

} // namespace dfgeo
