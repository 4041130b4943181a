# Cutting walks into pieces and gluing them back.

from polymer_lab import (Model, Potential, Walk, diamond_times, hw_decompose, hw_reconstruct,
                         irreducible_pieces, renewal_times, surgery, weight_sigma, zigzags)

# In[1]: a bridge and its renewal times

b = Walk.from_compass("EENWNEESEE")
print("renewals:", renewal_times(b))
for p in irreducible_pieces(b):
    print("  piece", p.to_compass())

# In[2]: Hammersley-Welsh split of an arbitrary walk

w = Walk.from_compass("NWWSSEEENNNW")
dec = hw_decompose(w)
print("half-space bridges:", [x.to_compass() for x in dec.bridges])
assert hw_reconstruct(dec) == w

# In[3]: zigzags and the unfold surgery

saw = Model.nearest_neighbor(Potential.saw())
zz = zigzags(b)
print("zigzags:", zz)
if zz:
    rec = surgery(b, "unfold", zz[0], model=saw, check=True)
    print("unfolded:", rec.output.to_compass(), "checks ok:", rec.ok)
    print("log weight in, out:", weight_sigma(b, saw.phi, saw.rho), weight_sigma(rec.output, saw.phi, saw.rho))

# In[4]: diamond times and stickbreak

c = Walk.from_compass("EEENEEEE")
d = diamond_times(c)
print("diamond times:", d)
if len(d) >= 2:
    rec = surgery(c, "stickbreak", (d[0], d[-1]), model=saw, check=True)
    print("stickbroken:", rec.output.to_compass(), rec.checks)
