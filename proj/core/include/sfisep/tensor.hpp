#pragma once

#include <cstddef>
#include <vector>

#include "sfisep/errors.hpp"

namespace sfisep {

// Dense rank-3 tensor laid out channel-major: plane(c) is a contiguous
// frames x bins matrix. Indexing convention everywhere is (channel, frame, bin).
template <class T>
struct Tensor3 {
  int channels = 0;
  int frames = 0;
  int bins = 0;
  std::vector<T> v;

  Tensor3() = default;
  Tensor3(int c, int t, int f)
      : channels(c), frames(t), bins(f),
        v(static_cast<std::size_t>(c) * t * f, T{0}) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(frames) * bins; }

  T* plane(int c) { return v.data() + static_cast<std::size_t>(c) * plane_size(); }
  const T* plane(int c) const { return v.data() + static_cast<std::size_t>(c) * plane_size(); }

  T* row(int c, int t) { return plane(c) + static_cast<std::size_t>(t) * bins; }
  const T* row(int c, int t) const { return plane(c) + static_cast<std::size_t>(t) * bins; }

  T& at(int c, int t, int f) { return row(c, t)[f]; }
  const T& at(int c, int t, int f) const { return row(c, t)[f]; }

  bool same_shape(const Tensor3& other) const {
    return channels == other.channels && frames == other.frames && bins == other.bins;
  }

  void fill(T value) { v.assign(v.size(), value); }

  void resize(int c, int t, int f) {
    channels = c;
    frames = t;
    bins = f;
    v.assign(static_cast<std::size_t>(c) * t * f, T{0});
  }
};

template <class T>
void require_shape(const Tensor3<T>& tensor, int c, int t, int f, const char* what) {
  require(tensor.channels == c && tensor.frames == t && tensor.bins == f,
          ErrorCode::shape_error, std::string("unexpected tensor shape for ") + what);
}

}  // namespace sfisep
