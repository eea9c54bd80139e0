#include "spca/kdtree.hpp"

#include "spca/errors.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace spca {

PointIndex::PointIndex(const PointMatrix& points, int leaf_size)
    : n_(points.rows()), d_(points.cols()), leaf_size_(std::max(1, leaf_size)) {
    if (n_ < 1 || d_ < 1) throw InvalidArgument("PointIndex: empty point set");
    order_.resize(static_cast<std::size_t>(n_));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    coords_.assign(points.data(), points.data() + n_ * d_);
    nodes_.reserve(static_cast<std::size_t>(2 * n_ / leaf_size_ + 2));
    build(0, static_cast<int>(n_), 0);

    std::vector<double> permuted(coords_.size());
    for (Eigen::Index i = 0; i < n_; ++i) {
        std::copy_n(&coords_[static_cast<std::size_t>(order_[i] * d_)], d_,
                    &permuted[static_cast<std::size_t>(i * d_)]);
    }
    coords_ = std::move(permuted);
}

int PointIndex::build(int begin, int end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end, -1, 0.0, -1, -1});
    if (end - begin <= leaf_size_) return id;

    // Split on the widest coordinate at the median.
    int best_dim = 0;
    double best_spread = -1.0;
    for (Eigen::Index j = 0; j < d_; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i = begin; i < end; ++i) {
            double v = coords_[static_cast<std::size_t>(order_[i] * d_ + j)];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = static_cast<int>(j);
        }
    }
    if (best_spread <= 0.0) return id;

    const int mid = begin + (end - begin) / 2;
    auto key = [&](Eigen::Index idx) { return coords_[static_cast<std::size_t>(idx * d_ + best_dim)]; };
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](Eigen::Index a, Eigen::Index b) { return key(a) < key(b); });
    const double split = key(order_[static_cast<std::size_t>(mid)]);

    nodes_[static_cast<std::size_t>(id)].split_dim = best_dim;
    nodes_[static_cast<std::size_t>(id)].split = split;
    int left = build(begin, mid, depth + 1);
    int right = build(mid, end, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

double PointIndex::dist2(const double* a, const double* b) const {
    return squared_distance(a, b, d_);
}

std::vector<Neighbor> PointIndex::knn(std::span<const double> query, Eigen::Index k) const {
    if (static_cast<Eigen::Index>(query.size()) != d_) throw InvalidArgument("knn: query dimension mismatch");
    if (k < 1 || k > n_) throw InvalidArgument("knn: k must be in [1, N]");

    std::priority_queue<Neighbor> heap;  // max-heap on (dist2, index)
    const double* q = query.data();

    // Explicit stack of (node, lower bound on squared distance).
    std::vector<std::pair<int, double>> stack;
    stack.reserve(64);
    stack.emplace_back(0, 0.0);
    while (!stack.empty()) {
        auto [id, bound] = stack.back();
        stack.pop_back();
        if (static_cast<Eigen::Index>(heap.size()) == k && bound > heap.top().dist2) continue;
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.split_dim < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                Neighbor cand{dist2(q, &coords_[static_cast<std::size_t>(i) * d_]), order_[static_cast<std::size_t>(i)]};
                if (static_cast<Eigen::Index>(heap.size()) < k) {
                    heap.push(cand);
                } else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            continue;
        }
        double diff = q[node.split_dim] - node.split;
        double far_bound = std::max(bound, diff * diff);
        int near = diff < 0.0 ? node.left : node.right;
        int far = diff < 0.0 ? node.right : node.left;
        // Points equal to the split value may sit on either side.
        if (diff == 0.0) far_bound = bound;
        stack.emplace_back(far, far_bound);
        stack.emplace_back(near, bound);
    }

    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = heap.top();
        heap.pop();
    }
    return out;
}

std::vector<Eigen::Index> PointIndex::within(std::span<const double> query, double radius) const {
    if (static_cast<Eigen::Index>(query.size()) != d_) throw InvalidArgument("within: query dimension mismatch");
    std::vector<Eigen::Index> out;
    const double r2 = radius * radius;
    const double* q = query.data();
    std::vector<std::pair<int, double>> stack;
    stack.emplace_back(0, 0.0);
    while (!stack.empty()) {
        auto [id, bound] = stack.back();
        stack.pop_back();
        if (bound > r2) continue;
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.split_dim < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                if (dist2(q, &coords_[static_cast<std::size_t>(i) * d_]) <= r2) {
                    out.push_back(order_[static_cast<std::size_t>(i)]);
                }
            }
            continue;
        }
        double diff = q[node.split_dim] - node.split;
        double far_bound = diff == 0.0 ? bound : std::max(bound, diff * diff);
        stack.emplace_back(diff < 0.0 ? node.right : node.left, far_bound);
        stack.emplace_back(diff < 0.0 ? node.left : node.right, bound);
    }
    return out;
}

}  // namespace spca
