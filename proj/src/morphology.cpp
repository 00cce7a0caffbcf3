#include "mfloc/morphology.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace mfloc {

namespace {

void require_same_extents(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw DimensionError(std::string(op) + ": mask extents differ (" + std::to_string(a.height()) + "x" +
                             std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                             std::to_string(b.width()) + ")");
    }
}

// Overlap of a grid with the same grid shifted by (dy, dx): dst(y,x) pairs with src(y+dy, x+dx).
struct Overlap {
    Index dst_y, dst_x, src_y, src_x, rows, cols;
};

Overlap overlap(Index h, Index w, Index dy, Index dx) {
    const Index y0 = std::max<Index>(0, -dy);
    const Index x0 = std::max<Index>(0, -dx);
    const Index y1 = std::min(h, h - dy);
    const Index x1 = std::min(w, w - dx);
    return {y0, x0, y0 + dy, x0 + dx, std::max<Index>(0, y1 - y0), std::max<Index>(0, x1 - x0)};
}

}  // namespace

BinaryMask::BinaryMask(Index height, Index width) {
    if (height <= 0 || width <= 0) throw DimensionError("BinaryMask extents must be positive");
    bits_ = BitGrid::Constant(height, width, false);
}

BinaryMask::BinaryMask(BitGrid bits) : bits_(std::move(bits)) {
    if (bits_.rows() <= 0 || bits_.cols() <= 0) throw DimensionError("BinaryMask extents must be positive");
}

BinaryMask BinaryMask::full(Index height, Index width) {
    BinaryMask m(height, width);
    m.bits_.setConstant(true);
    return m;
}

BinaryMask BinaryMask::complement() const { return BinaryMask(BitGrid(bits_ == false)); }

bool BinaryMask::subset_of(const BinaryMask& other) const {
    require_same_extents(*this, other, "subset_of");
    return ((bits_ && (other.bits_ == false)) == false).all();
}

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b) {
    require_same_extents(a, b, "mask union");
    return BinaryMask(BitGrid(a.bits() || b.bits()));
}

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b) {
    require_same_extents(a, b, "mask intersection");
    return BinaryMask(BitGrid(a.bits() && b.bits()));
}

StructuringElement::StructuringElement(BitGrid bits) : bits_(std::move(bits)) {
    if (bits_.rows() % 2 == 0 || bits_.cols() % 2 == 0 || bits_.size() == 0) {
        throw ParameterError("structuring element extents must be odd");
    }
    if (!bits_(radius_y(), radius_x())) throw ParameterError("structuring element origin must be set");
}

StructuringElement StructuringElement::square(Index size) {
    if (size < 1 || size % 2 == 0) {
        throw ParameterError("structuring element size must be odd and >= 1, got " + std::to_string(size));
    }
    return StructuringElement(BitGrid::Constant(size, size, true));
}

StructuringElement StructuringElement::reflected() const {
    return StructuringElement(BitGrid(bits_.reverse()));
}

std::vector<StructuringElement::Offset> StructuringElement::offsets() const {
    std::vector<Offset> out;
    for (Index y = 0; y < height(); ++y)
        for (Index x = 0; x < width(); ++x)
            if (bits_(y, x)) out.push_back({y - radius_y(), x - radius_x()});
    return out;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
    BitGrid out = BitGrid::Constant(mask.height(), mask.width(), false);
    for (const auto& [dy, dx] : se.offsets()) {
        // out(z) |= M(z - b)
        const Overlap o = overlap(mask.height(), mask.width(), -dy, -dx);
        if (o.rows == 0 || o.cols == 0) continue;
        out.block(o.dst_y, o.dst_x, o.rows, o.cols) =
            out.block(o.dst_y, o.dst_x, o.rows, o.cols) || mask.bits().block(o.src_y, o.src_x, o.rows, o.cols);
    }
    return BinaryMask(std::move(out));
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
    BitGrid out = mask.bits();
    for (const auto& [dy, dx] : se.offsets()) {
        // out(z) &= M(z + b); positions whose translate leaves the image fail.
        const Overlap o = overlap(mask.height(), mask.width(), dy, dx);
        BitGrid shifted = BitGrid::Constant(mask.height(), mask.width(), false);
        if (o.rows > 0 && o.cols > 0) {
            shifted.block(o.dst_y, o.dst_x, o.rows, o.cols) = mask.bits().block(o.src_y, o.src_x, o.rows, o.cols);
        }
        out = out && shifted;
    }
    return BinaryMask(std::move(out));
}

BinaryMask mdmf_fuse(const BinaryMask& lfdl, const BinaryMask& mitl, const StructuringElement& se) {
    require_same_extents(lfdl, mitl, "mdmf_fuse");
    return dilate(lfdl, se) | erode(mitl, se);
}

BinaryMask naive_fuse(const BinaryMask& a, const BinaryMask& b) {
    require_same_extents(a, b, "naive_fuse");
    return a | b;
}

BinaryMask binarize(const TensorD& prob, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ParameterError("binarize: threshold must lie in (0,1), got " + std::to_string(threshold));
    }
    if (prob.rank() != 2) throw DimensionError("binarize expects [H,W], got " + shape_string(prob.shape()));
    return BinaryMask(BitGrid(prob.plane(0).array() >= threshold));
}

TensorD to_tensor(const BinaryMask& mask) {
    return TensorD::from_plane(mask.bits().cast<double>());
}

ComponentLabels label_components(const BinaryMask& mask) {
    ComponentLabels result;
    result.labels.setZero(mask.height(), mask.width());
    std::vector<std::pair<Index, Index>> stack;
    for (Index y = 0; y < mask.height(); ++y) {
        for (Index x = 0; x < mask.width(); ++x) {
            if (!mask(y, x) || result.labels(y, x) != 0) continue;
            const std::int32_t id = ++result.count;
            result.labels(y, x) = id;
            stack.emplace_back(y, x);
            while (!stack.empty()) {
                const auto [cy, cx] = stack.back();
                stack.pop_back();
                for (Index ny = std::max<Index>(0, cy - 1); ny <= std::min(mask.height() - 1, cy + 1); ++ny) {
                    for (Index nx = std::max<Index>(0, cx - 1); nx <= std::min(mask.width() - 1, cx + 1); ++nx) {
                        if (mask(ny, nx) && result.labels(ny, nx) == 0) {
                            result.labels(ny, nx) = id;
                            stack.emplace_back(ny, nx);
                        }
                    }
                }
            }
        }
    }
    return result;
}

}  // namespace mfloc
