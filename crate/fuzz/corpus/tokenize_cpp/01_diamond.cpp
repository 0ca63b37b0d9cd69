class a {};
class b : public a {};
class c : public a {};
class d : public b, public c {};
