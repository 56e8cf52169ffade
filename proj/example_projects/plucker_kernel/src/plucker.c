// Ray-triangle kernel checked against the Moller-Trumbore test.
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

typedef struct {
  double x, y, z;
} vec3;

typedef struct {
  int hit;
  double t;
  double alpha[3];
} hit_info;

hit_info plucker_hit(vec3 o, vec3 dir, vec3 v1, vec3 v2, vec3 v3) {
  double d1, d2, d3, a1, a2, a3, t;
  hit_info h = {0, 0, {0, 0, 0}};
  // GMac : PluckerRayTriangle
  // GMac.Bind("pr", "ProjectivePoint", "o")
  // GMac.Bind("vr.e1", "<dir.x>")
  // GMac.Bind("vr.e2", "<dir.y>")
  // GMac.Bind("vr.e3", "<dir.z>")
  // GMac.Bind("v1", "ProjectivePoint", "v1")
  // GMac.Bind("v2", "ProjectivePoint", "v2")
  // GMac.Bind("v3", "ProjectivePoint", "v3")
  // GMac.Bind("d1.1", "<d1>")
  // GMac.Bind("d2.1", "<d2>")
  // GMac.Bind("d3.1", "<d3>")
  // GMac.Bind("a1.1", "<a1>")
  // GMac.Bind("a2.1", "<a2>")
  // GMac.Bind("a3.1", "<a3>")
  // GMac.Bind("t.1", "<t>")
  // <auto-generated by gamacro>
  double var0001 = -dir.x*o.y + dir.y*o.x;
  double var0002 = -dir.x*o.z + dir.z*o.x;
  double var0003 = -dir.y*o.z + dir.z*o.y;
  double var0004 = v1.x*v2.y - v1.y*v2.x;
  double var0005 = v1.x*v2.z - v1.z*v2.x;
  double var0006 = v1.y*v2.z - v1.z*v2.y;
  double var0007 = v1.x - v2.x;
  double var0008 = v1.y - v2.y;
  double var0009 = v1.z - v2.z;
  double var0010 = v2.x*v3.y - v2.y*v3.x;
  double var0011 = v2.x*v3.z - v2.z*v3.x;
  double var0012 = v2.y*v3.z - v2.z*v3.y;
  double var0013 = v2.x - v3.x;
  double var0014 = v2.y - v3.y;
  double var0015 = v2.z - v3.z;
  double var0016 = -v1.x*v3.y + v1.y*v3.x;
  double var0017 = -v1.x*v3.z + v1.z*v3.x;
  double var0018 = -v1.y*v3.z + v1.z*v3.y;
  double var0019 = -v1.x + v3.x;
  double var0020 = -v1.y + v3.y;
  double var0021 = -v1.z + v3.z;
  double var0022 = -dir.x*var0006 + dir.y*var0005 - dir.z*var0004 + var0001*var0009 - var0002*var0008 + var0003*var0007;
  double var0023 = -dir.x*var0012 + dir.y*var0011 - dir.z*var0010 + var0001*var0015 - var0002*var0014 + var0003*var0013;
  double var0024 = -dir.x*var0018 + dir.y*var0017 - dir.z*var0016 + var0001*var0021 - var0002*var0020 + var0003*var0019;
  double var0025 = var0022 + var0023 + var0024;
  double var0026 = -v1.x + v2.x;
  double var0027 = -v1.y + v2.y;
  double var0028 = -v1.z + v2.z;
  double var0029 = -v1.x + v3.x;
  double var0030 = -v1.y + v3.y;
  double var0031 = -v1.z + v3.z;
  double var0032 = -o.x + v1.x;
  double var0033 = -o.y + v1.y;
  double var0034 = -o.z + v1.z;
  double var0035 = var0026*var0030 - var0027*var0029;
  double var0036 = var0026*var0031 - var0028*var0029;
  double var0037 = var0027*var0031 - var0028*var0030;
  double var0038 = var0032*var0037 - var0033*var0036 + var0034*var0035;
  a1 = var0022/var0025;
  a2 = var0023/var0025;
  a3 = var0024/var0025;
  d1 = var0022;
  d2 = var0023;
  d3 = var0024;
  t = var0038/(dir.x*var0037 - dir.y*var0036 + dir.z*var0035);
  // </auto-generated>
  // GMac end
  if (fabs(d1 + d2 + d3) <= 1e-12) return h;
  h.hit = (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
  h.t = t;
  h.alpha[0] = a1;
  h.alpha[1] = a2;
  h.alpha[2] = a3;
  return h;
}

static vec3 sub(vec3 a, vec3 b) { return (vec3){a.x - b.x, a.y - b.y, a.z - b.z}; }
static vec3 cross(vec3 a, vec3 b) { return (vec3){a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
static double dot(vec3 a, vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
static double rnd(double lo, double hi) { return lo + (hi - lo) * rand() / RAND_MAX; }
static vec3 rvec(double lo, double hi) { return (vec3){rnd(lo, hi), rnd(lo, hi), rnd(lo, hi)}; }

int main(void) {
  srand(11);
  int tested = 0, mismatches = 0, hits = 0;
  double worst_t = 0;
  while (tested < 200000) {
    vec3 o = rvec(-3, 3), dir = rvec(-1, 1), v1 = rvec(-1, 1), v2 = rvec(-1, 1), v3 = rvec(-1, 1);
    vec3 e1 = sub(v2, v1), e2 = sub(v3, v1), p = cross(dir, e2);
    double det = dot(e1, p);
    if (fabs(det) < 1e-6) continue;
    vec3 s = sub(o, v1), q = cross(s, e1);
    double b2 = dot(s, p) / det, b3 = dot(dir, q) / det, b1 = 1 - b2 - b3;
    if (fmin(fabs(b1), fmin(fabs(b2), fabs(b3))) <= 1e-7) continue;
    ++tested;
    int expect = b1 > 0 && b2 > 0 && b3 > 0;
    hit_info h = plucker_hit(o, dir, v1, v2, v3);
    if (h.hit != expect) ++mismatches;
    if (expect) {
      ++hits;
      double t = dot(e2, q) / det;
      worst_t = fmax(worst_t, fabs(h.t - t) / fmax(1, fabs(t)));
    }
  }
  printf("%d pairs, %d hits, %d mismatches, max t error %.3g\n", tested, hits, mismatches, worst_t);
  return mismatches == 0 && worst_t < 1e-9 ? 0 : 1;
}
