#pragma once

namespace svsp {

// Thread budget for the OpenMP kernels. Every parallel kernel in this
// project produces bit-identical results for any thread count; the
// budget only changes wall time.
int max_threads();
void set_max_threads(int n);

class ScopedThreads {
 public:
  explicit ScopedThreads(int n);
  ~ScopedThreads();
  ScopedThreads(const ScopedThreads&) = delete;
  ScopedThreads& operator=(const ScopedThreads&) = delete;

 private:
  int previous_;
};

}  // namespace svsp
