// Sphere, plane and distance kernels over conformal points.
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

typedef struct {
  double x, y, z;
} vec3;

// Dual sphere through four points: center and radius.
int sphere_through(vec3 a, vec3 b, vec3 c, vec3 d, vec3* center, double* radius) {
  double w0, w1, w2, w3, winf;
  // GMac : SphereThrough4Points
  // GMac.Bind("p1", "PointE3", "a")
  // GMac.Bind("p2", "PointE3", "b")
  // GMac.Bind("p3", "PointE3", "c")
  // GMac.Bind("p4", "PointE3", "d")
  // GMac.Bind("w.e0", "<w0>")
  // GMac.Bind("w.e1", "<w1>")
  // GMac.Bind("w.e2", "<w2>")
  // GMac.Bind("w.e3", "<w3>")
  // GMac.Bind("w.einf", "<winf>")
  // <auto-generated by gamacro>
  double var0001 = pow(a.x, 2)/2 + pow(a.y, 2)/2 + pow(a.z, 2)/2;
  double var0002 = pow(b.x, 2)/2 + pow(b.y, 2)/2 + pow(b.z, 2)/2;
  double var0003 = pow(c.x, 2)/2 + pow(c.y, 2)/2 + pow(c.z, 2)/2;
  double var0004 = pow(d.x, 2)/2 + pow(d.y, 2)/2 + pow(d.z, 2)/2;
  double var0005 = -a.x + b.x;
  double var0006 = -a.y + b.y;
  double var0007 = a.x*b.y - a.y*b.x;
  double var0008 = -a.z + b.z;
  double var0009 = a.x*b.z - a.z*b.x;
  double var0010 = a.y*b.z - a.z*b.y;
  double var0011 = -var0001 + var0002;
  double var0012 = a.x*var0002 - b.x*var0001;
  double var0013 = a.y*var0002 - b.y*var0001;
  double var0014 = a.z*var0002 - b.z*var0001;
  double var0015 = -c.x*var0006 + c.y*var0005 + var0007;
  double var0016 = -c.x*var0008 + c.z*var0005 + var0009;
  double var0017 = -c.y*var0008 + c.z*var0006 + var0010;
  double var0018 = c.x*var0010 - c.y*var0009 + c.z*var0007;
  double var0019 = -c.x*var0011 + var0003*var0005 + var0012;
  double var0020 = -c.y*var0011 + var0003*var0006 + var0013;
  double var0021 = c.x*var0013 - c.y*var0012 + var0003*var0007;
  double var0022 = -c.z*var0011 + var0003*var0008 + var0014;
  double var0023 = c.x*var0014 - c.z*var0012 + var0003*var0009;
  double var0024 = c.y*var0014 - c.z*var0013 + var0003*var0010;
  w0 = -d.x*var0017 + d.y*var0016 - d.z*var0015 + var0018;
  w1 = -d.y*var0022 + d.z*var0020 - var0004*var0017 + var0024;
  w2 = d.x*var0022 - d.z*var0019 + var0004*var0016 - var0023;
  w3 = -d.x*var0020 + d.y*var0019 - var0004*var0015 + var0021;
  winf = d.x*var0024 - d.y*var0023 + d.z*var0021 - var0004*var0018;
  // </auto-generated>
  // GMac end
  if (fabs(w0) < 1e-12) return 0;
  center->x = w1 / w0;
  center->y = w2 / w0;
  center->z = w3 / w0;
  double r2 = center->x * center->x + center->y * center->y + center->z * center->z - 2 * winf / w0;
  *radius = sqrt(fabs(r2));
  return 1;
}

// Dual plane through three points: unit normal and offset from the origin.
void plane_through(vec3 a, vec3 b, vec3 c, vec3* normal, double* offset) {
  double n1, n2, n3, ninf;
  // GMac : PlaneThrough3Points
  // GMac.Bind("p1", "PointE3", "a")
  // GMac.Bind("p2", "PointE3", "b")
  // GMac.Bind("p3", "PointE3", "c")
  // GMac.Bind("w.e1", "<n1>")
  // GMac.Bind("w.e2", "<n2>")
  // GMac.Bind("w.e3", "<n3>")
  // GMac.Bind("w.einf", "<ninf>")
  // <auto-generated by gamacro>
  double var0001 = -a.x + b.x;
  double var0002 = -a.y + b.y;
  double var0003 = a.x*b.y - a.y*b.x;
  double var0004 = -a.z + b.z;
  double var0005 = a.x*b.z - a.z*b.x;
  double var0006 = a.y*b.z - a.z*b.y;
  n1 = c.y*var0004 - c.z*var0002 - var0006;
  n2 = -c.x*var0004 + c.z*var0001 + var0005;
  n3 = c.x*var0002 - c.y*var0001 - var0003;
  ninf = -c.x*var0006 + c.y*var0005 - c.z*var0003;
  // </auto-generated>
  // GMac end
  double len = sqrt(n1 * n1 + n2 * n2 + n3 * n3);
  normal->x = n1 / len;
  normal->y = n2 / len;
  normal->z = n3 / len;
  *offset = ninf / len;
}

double distance2(vec3 p, vec3 q) {
  double d;
  // GMac : PointDistance2
  // GMac.Bind("p", "PointE3", "p")
  // GMac.Bind("q", "PointE3", "q")
  // GMac.Bind("d.1", "<d>")
  // <auto-generated by gamacro>
  double var0001 = pow(p.x, 2)/2 + pow(p.y, 2)/2 + pow(p.z, 2)/2;
  double var0002 = pow(q.x, 2)/2 + pow(q.y, 2)/2 + pow(q.z, 2)/2;
  double var0003 = p.x*q.x + p.y*q.y + p.z*q.z - var0001 - var0002;
  d = -2*var0003;
  // </auto-generated>
  // GMac end
  return d;
}

static double rnd(void) { return 4.0 * rand() / RAND_MAX - 2.0; }

int main(void) {
  srand(7);
  double worst = 0;
  for (int i = 0; i < 2000; ++i) {
    vec3 c = {rnd(), rnd(), rnd()};
    double r = 0.5 + fabs(rnd());
    vec3 p[4];
    for (int k = 0; k < 4; ++k) {
      double theta = 3.0 * rnd(), z = rnd() / 2.0;
      double s = sqrt(1 - z * z);
      p[k] = (vec3){c.x + r * s * cos(theta + k * 1.7), c.y + r * s * sin(theta + k * 1.7), c.z + r * z * (k % 2 ? 1 : -1)};
    }
    // skip nearly coplanar draws: the sphere is ill-conditioned there
    double ux = p[1].x - p[0].x, uy = p[1].y - p[0].y, uz = p[1].z - p[0].z;
    double vx = p[2].x - p[0].x, vy = p[2].y - p[0].y, vz = p[2].z - p[0].z;
    double tx = p[3].x - p[0].x, ty = p[3].y - p[0].y, tz = p[3].z - p[0].z;
    double vol = fabs(ux * (vy * tz - vz * ty) - uy * (vx * tz - vz * tx) + uz * (vx * ty - vy * tx));
    if (vol < 1e-2 * r * r * r) continue;
    vec3 got;
    double radius;
    if (!sphere_through(p[0], p[1], p[2], p[3], &got, &radius)) return 1;
    double err = fabs(got.x - c.x) + fabs(got.y - c.y) + fabs(got.z - c.z) + fabs(radius - r);
    worst = fmax(worst, err);
    vec3 n;
    double off;
    plane_through(p[0], p[1], p[2], &n, &off);
    for (int k = 0; k < 3; ++k) worst = fmax(worst, fabs(n.x * p[k].x + n.y * p[k].y + n.z * p[k].z - off));
    double dx = p[0].x - p[1].x, dy = p[0].y - p[1].y, dz = p[0].z - p[1].z;
    worst = fmax(worst, fabs(distance2(p[0], p[1]) - (dx * dx + dy * dy + dz * dz)));
  }
  printf("max error %.3g\n", worst);
  return worst < 1e-9 ? 0 : 1;
}
