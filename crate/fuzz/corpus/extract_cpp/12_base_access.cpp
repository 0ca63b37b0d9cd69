class A {};
class B {};
class C {};
class D : protected A, private virtual B, C {};
struct E : A, virtual protected B {};
