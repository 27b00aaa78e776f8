#ifndef LIO_KD_TREE_HPP
#define LIO_KD_TREE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace lio {

/// Exact 3-D KD-tree over externally owned point ids. No approximation:
/// k-nearest-neighbor results match a brute-force scan.
class KdTree3 {
  public:
    struct Hit {
        double dist_sq;
        std::uint32_t id;
    };

    KdTree3() = default;

    /// Builds over points[ids[i]]; the coordinate array must outlive queries.
    void build(const std::vector<Eigen::Vector3d>& coords,
               std::vector<std::uint32_t> ids);

    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }

    /// Exact k nearest (ascending distance); fewer if the tree holds fewer.
    void knn(const std::vector<Eigen::Vector3d>& coords,
             const Eigen::Vector3d& query, std::size_t k,
             std::vector<Hit>& out) const;

  private:
    struct Node {
        std::uint32_t id;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t axis = 0;
    };

    std::int32_t build_range(const std::vector<Eigen::Vector3d>& coords,
                             std::uint32_t* begin, std::uint32_t* end);
    void search(const std::vector<Eigen::Vector3d>& coords,
                const Eigen::Vector3d& query, std::size_t k, std::int32_t node,
                std::vector<Hit>& heap) const;

    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace lio

#endif  // LIO_KD_TREE_HPP
