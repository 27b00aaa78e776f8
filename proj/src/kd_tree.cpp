#include "lio/kd_tree.hpp"

#include <algorithm>

namespace lio {

namespace {

bool hit_less(const KdTree3::Hit& a, const KdTree3::Hit& b) {
    return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.id < b.id);
}

}  // namespace

void KdTree3::build(const std::vector<Eigen::Vector3d>& coords,
                    std::vector<std::uint32_t> ids) {
    nodes_.clear();
    nodes_.reserve(ids.size());
    root_ = ids.empty() ? -1 : build_range(coords, ids.data(), ids.data() + ids.size());
}

std::int32_t KdTree3::build_range(const std::vector<Eigen::Vector3d>& coords,
                                  std::uint32_t* begin, std::uint32_t* end) {
    if (begin == end) {
        return -1;
    }
    // Split on the widest extent of this subset.
    Eigen::Vector3d lo = coords[*begin];
    Eigen::Vector3d hi = lo;
    for (auto* it = begin; it != end; ++it) {
        lo = lo.cwiseMin(coords[*it]);
        hi = hi.cwiseMax(coords[*it]);
    }
    int axis;
    (hi - lo).maxCoeff(&axis);

    auto* mid = begin + (end - begin) / 2;
    std::nth_element(begin, mid, end, [&](std::uint32_t a, std::uint32_t b) {
        return coords[a][axis] < coords[b][axis];
    });

    const auto node_index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{*mid, -1, -1, static_cast<std::uint8_t>(axis)});
    const std::int32_t left = build_range(coords, begin, mid);
    const std::int32_t right = build_range(coords, mid + 1, end);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

void KdTree3::knn(const std::vector<Eigen::Vector3d>& coords,
                  const Eigen::Vector3d& query, std::size_t k,
                  std::vector<Hit>& out) const {
    out.clear();
    if (k == 0 || root_ < 0) {
        return;
    }
    search(coords, query, k, root_, out);
    std::sort_heap(out.begin(), out.end(), hit_less);
}

void KdTree3::search(const std::vector<Eigen::Vector3d>& coords,
                     const Eigen::Vector3d& query, std::size_t k,
                     std::int32_t node_index, std::vector<Hit>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_index)];
    const Eigen::Vector3d& p = coords[node.id];
    const double d2 = (p - query).squaredNorm();
    if (heap.size() < k) {
        heap.push_back(Hit{d2, node.id});
        std::push_heap(heap.begin(), heap.end(), hit_less);
    } else if (d2 < heap.front().dist_sq) {
        std::pop_heap(heap.begin(), heap.end(), hit_less);
        heap.back() = Hit{d2, node.id};
        std::push_heap(heap.begin(), heap.end(), hit_less);
    }

    const double delta = query[node.axis] - p[node.axis];
    const std::int32_t near = delta < 0.0 ? node.left : node.right;
    const std::int32_t far = delta < 0.0 ? node.right : node.left;
    if (near >= 0) {
        search(coords, query, k, near, heap);
    }
    if (far >= 0 && (heap.size() < k || delta * delta < heap.front().dist_sq)) {
        search(coords, query, k, far, heap);
    }
}

}  // namespace lio
